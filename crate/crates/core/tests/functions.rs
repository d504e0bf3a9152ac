mod common;

use common::*;
use rand::Rng;
use submix_core::kernel::{build_kernel, KernelConfig, KernelTransform};
use submix_core::{naive_greedy, FunctionSpec, SubmodularFn};

#[test]
fn incremental_matches_formula_on_k3() {
    let k: Vec<Vec<f64>> = K3.iter().map(|r| r.to_vec()).collect();
    let kern = to_kernel(&k);
    for oracle in [
        Oracle::Fl,
        Oracle::Gc(0.4),
        Oracle::LogDet(0.0),
        Oracle::LogDet(1e-6),
    ] {
        let mut f = SubmodularFn::new(oracle.spec(), &kern).unwrap();
        let mut x = Vec::new();
        for v in [2, 0, 1] {
            let g = f.gain(v).unwrap();
            let mut y = x.clone();
            y.push(v);
            let expected = oracle.eval(&k, &y) - oracle.eval(&k, &x);
            assert!((g - expected).abs() < 1e-12, "{oracle:?} v={v}");
            f.commit(v).unwrap();
            x = y;
            assert!((f.value() - oracle.eval(&k, &x)).abs() < 1e-12);
        }
    }
}

#[test]
fn scaling_kernel_scales_gains_and_keeps_sequence() {
    let mut r = rng(11);
    for trial in 0..50 {
        let n = 3 + trial % 10;
        let k = random_unit_kernel(&mut r, n);
        let c = r.random_range(0.1..10.0);
        let base = to_kernel(&k);
        let scaled = base.scaled(c);
        for spec in [
            FunctionSpec::FacilityLocation,
            FunctionSpec::GraphCut { lambda: 0.4 },
        ] {
            let a = naive_greedy(&mut SubmodularFn::new(spec, &base).unwrap(), n).unwrap();
            let b = naive_greedy(&mut SubmodularFn::new(spec, &scaled).unwrap(), n).unwrap();
            assert_eq!(a.selected, b.selected, "{spec:?} c={c}");
            for (ga, gb) in a.gains.iter().zip(&b.gains) {
                assert!((ga * c - gb).abs() <= 1e-9 * (1.0 + gb.abs()));
            }
        }
    }
}

#[test]
fn fl_gains_never_negative() {
    let mut r = rng(5);
    for _ in 0..100 {
        let n = r.random_range(1..=12);
        let k = random_unit_kernel(&mut r, n);
        let kern = to_kernel(&k);
        let mut f = SubmodularFn::new(FunctionSpec::FacilityLocation, &kern).unwrap();
        for v in random_subset(&mut r, n, n) {
            for u in (0..n).filter(|&u| !f.is_selected(u)) {
                assert!(f.gain(u).unwrap() >= -1e-12);
            }
            f.commit(v).unwrap();
        }
    }
}

#[test]
fn affine_kernels_are_psd() {
    let mut r = rng(2024);
    for _ in 0..100 {
        let n = r.random_range(1..=16);
        let dim = r.random_range(1..=8);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let v: Vec<f64> = (0..dim).map(|_| r.random_range(-1.0..1.0)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-3);
                v.into_iter().map(|x| x / norm).collect()
            })
            .collect();
        let k = build_kernel(
            &rows,
            &KernelConfig {
                transform: KernelTransform::AffineRescale,
            },
        )
        .unwrap();
        let dense: Vec<Vec<f64>> = (0..n).map(|i| k.row(i).to_vec()).collect();
        let min = symmetric_eigenvalues(dense)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-8, "min eigenvalue {min}");
    }
}

#[test]
fn jacobi_oracle_sanity() {
    let mut ev = symmetric_eigenvalues(vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
    ev.sort_by(f64::total_cmp);
    assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    assert!((det(vec![vec![1.0, 0.5], vec![0.5, 1.0]]) - 0.75).abs() < 1e-15);
}
