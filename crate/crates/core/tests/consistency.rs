//! Cross-module checks: the Fourier series against the lattice sum, the
//! cached table against a fresh one, and modularity of evaluated values.

use poincare_lab::cache::{load_or_build, table_from_str, table_to_string};
use poincare_lab::poincare::{
    evaluate, evaluate_lattice, mass_density, table_for_height, ModularParams, ModularPoint,
};
use poincare_lab::zeros::zero_inventory;
use proptest::prelude::*;

fn table(k: u32, m: u64) -> poincare_lab::poincare::CoefficientTable {
    table_for_height(&ModularParams::new(k, m).unwrap(), 32, 1e-10, 0.5).unwrap()
}

#[test]
fn series_matches_lattice_sum() {
    for (k, m) in [(16u32, 2u64), (24, 1), (20, 3)] {
        let t = table(k, m);
        let p = ModularParams::new(k, m).unwrap();
        for (x, y) in [(0.1, 0.9), (-0.37, 1.3), (0.5, 0.87)] {
            let z = ModularPoint::new(x, y).unwrap();
            let a = evaluate(&t, &z).unwrap();
            let b = evaluate_lattice(&p, &z, 200).unwrap();
            let rel = (a.to_complex() - b.to_complex()).norm() / b.to_complex().norm();
            assert!(rel < 1e-8, "k = {k}, m = {m}, z = {x} + {y}i: {rel:e}");
        }
    }
}

#[test]
fn cached_table_reproduces_values() {
    let dir = std::env::temp_dir().join(format!("pkm-consistency-{}", std::process::id()));
    let p = ModularParams::new(18, 2).unwrap();
    let (built, hit) = load_or_build(&dir, &p, 40, 1e-10, 256).unwrap();
    assert!(!hit);
    let (read, hit) = load_or_build(&dir, &p, 40, 1e-10, 256).unwrap();
    assert!(hit);
    let z = ModularPoint::new(0.21, 0.95).unwrap();
    assert_eq!(evaluate(&built, &z).unwrap(), evaluate(&read, &z).unwrap());
    let text = table_to_string(&read).unwrap();
    assert_eq!(table_from_str(&text).unwrap(), built);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn inventories_balance_beyond_m_one() {
    for (k, m) in [(24u32, 2u64), (28, 3), (32, 2)] {
        let inv = zero_inventory(&table(k, m), None, 1e-10).unwrap();
        assert!(inv.certified, "k = {k}, m = {m}: deficit {:?}", inv.deficit);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// `P(-1/z) = z^k P(z)` whenever both points are high enough for the series.
    #[test]
    fn inversion(x in -0.5f64..0.5, y in 0.5f64..1.4) {
        let t = table(16, 1);
        let z = ModularPoint::new(x, y).unwrap();
        let r2 = x * x + y * y;
        prop_assume!(y / r2 >= 0.5);
        let w = ModularPoint::new(-x / r2, y / r2).unwrap();
        let pz = evaluate(&t, &z).unwrap().to_complex();
        let pw = evaluate(&t, &w).unwrap().to_complex();
        let zk = num_complex::Complex64::new(x, y).powu(16);
        prop_assert!((pw - zk * pz).norm() <= 1e-8 * pw.norm().max(1e-300));
    }

    /// The mass density is invariant under `z -> -conj(z)` and `z -> z + 1`.
    #[test]
    fn density_symmetries(x in -0.5f64..0.5, y in 0.6f64..2.0) {
        let t = table(20, 2);
        let d = mass_density(&t, &ModularPoint::new(x, y).unwrap()).unwrap();
        let mirrored = mass_density(&t, &ModularPoint::new(-x, y).unwrap()).unwrap();
        let shifted = mass_density(&t, &ModularPoint::new(x + 1.0, y).unwrap()).unwrap();
        prop_assert!((d - mirrored).abs() <= 1e-9 * d.max(1e-300));
        prop_assert!((d - shifted).abs() <= 1e-9 * d.max(1e-300));
    }
}
