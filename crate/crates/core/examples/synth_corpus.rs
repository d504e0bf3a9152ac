//! Writes a synthetic dataset directory.
//!
//! ```text
//! cargo run -p submix-core --example synth_corpus -- OUT_DIR [TASKS] [PER_TASK] [DIM] [SEED]
//! ```

use submix_core::synth::{generate, SynthSpec};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(out) = args.first() else {
        eprintln!("usage: synth_corpus OUT_DIR [TASKS] [PER_TASK] [DIM] [SEED]");
        std::process::exit(1);
    };
    let num = |i: usize, default: u64| -> u64 {
        args.get(i)
            .map_or(default, |s| s.parse().expect("numeric argument"))
    };
    let spec = SynthSpec::tasks(
        num(1, 4) as usize,
        num(2, 50) as usize,
        num(3, 16) as usize,
        num(4, 0),
    )
    .with_templates(&["fs_opt", "fs_noopt", "zs_opt", "zs_noopt"]);
    match generate(&spec, out) {
        Ok(c) => println!("{}", c.manifest_path.display()),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
