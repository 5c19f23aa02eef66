//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria 1-9 run once on an 8-thread pool, again on an 8-thread pool and
//! once on a single thread; criterion 10 compares the three transcripts.
//! The process exits 0 so the workspace test run completes; set
//! `PKM_ACCEPTANCE_STRICT=1` to exit 1 when any criterion fails.

use std::time::{Duration, Instant};

use poincare_lab::diagnostics::{
    check_bessel_envelopes, check_kloosterman_bound, check_mass_convergence, check_pkmm_limit,
    check_zero_equidistribution, default_bumps, envelope_grid, Schedule,
};
use poincare_lab::poincare::{
    coefficient, mass_integral, oracle_coefficients, table_for_height, ModularParams, QuadSpec, Region,
};
use poincare_lab::spectral::{constant_term_closed_form, inner_product_direct, inner_product_unfolded, EisensteinSpec};
use poincare_lab::zeros::{default_partition, zero_inventory, ZeroLocus};
use poincare_lab::Result;

struct Outcome {
    pass: bool,
    detail: String,
    /// Everything the criterion computed, rendered exactly.
    transcript: String,
}

fn floor() -> f64 {
    0.75f64.sqrt()
}

fn quad(rel_tol: f64) -> QuadSpec {
    QuadSpec {
        abs_tol: 0.0,
        rel_tol,
        max_depth: 40,
    }
}

fn kloosterman() -> Result<Outcome> {
    let r = check_kloosterman_bound(2000, 100)?;
    Ok(Outcome {
        pass: r.pass,
        detail: format!("{} tuples, {}", r.tuples, r.notes.join(", ")),
        transcript: format!("{r:?}"),
    })
}

fn oracle_equivalence() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut transcript = String::new();
    for k in [16u32, 20, 24] {
        for m in [1u64, 2, 3] {
            let p = ModularParams::new(k, m)?;
            let lattice = oracle_coefficients(&p, 10, 1.0, 200, 64)?;
            for n in 1..=10u64 {
                let c = coefficient(&p, n, 1e-12)?.value.to_f64();
                let o = lattice[n as usize - 1];
                let rel = (o.re - c).abs().max(o.im.abs()) / c.abs();
                worst = worst.max(rel);
                transcript += &format!("{k} {m} {n} {c:?} {:?} {:?}\n", o.re, o.im);
            }
        }
    }
    Ok(Outcome {
        pass: worst < 1e-8,
        detail: format!("worst relative difference {worst:.2e}"),
        transcript,
    })
}

fn delta_proportionality() -> Result<Outcome> {
    let p = ModularParams::new(12, 1)?;
    let kl: Vec<f64> = (1..=10u64)
        .map(|n| coefficient(&p, n, 1e-12).map(|c| c.value.to_f64()))
        .collect::<Result<_>>()?;
    // At y = 1 the transform amplifies the lattice truncation error, which
    // decays only like cut^{-10} at this weight, by e^{2 pi n y}; y = 0.6 keeps
    // n = 10 accurate.
    let lattice: Vec<f64> = oracle_coefficients(&p, 10, 0.6, 200, 64)?.iter().map(|c| c.re).collect();
    let mut worst_int: f64 = 0.0;
    let mut same = true;
    let mut transcript = String::new();
    for n in 0..10 {
        let (a, b) = (kl[n] / kl[0], lattice[n] / lattice[0]);
        worst_int = worst_int.max((a - a.round()).abs()).max((b - b.round()).abs());
        same &= a.round() == b.round();
        transcript += &format!("{} {a:?} {b:?}\n", n + 1);
    }
    Ok(Outcome {
        pass: worst_int < 1e-6 && same,
        detail: format!("max distance to an integer {worst_int:.2e}, paths agree: {same}"),
        transcript,
    })
}

fn mass_normalization() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut transcript = String::new();
    for (k, m) in [(20u32, 1u64), (40, 5), (100, 50), (180, 1800)] {
        let t = table_for_height(&ModularParams::new(k, m)?, 32, 1e-10, floor())?;
        let r = mass_integral(&t, &Region::full(), &quad(1e-9))?;
        worst = worst.max((r.value - 1.0).abs());
        transcript += &format!("{k} {m} {:?} {:?}\n", r.value, r.error);
    }
    Ok(Outcome {
        pass: worst <= 1e-6,
        detail: format!("max |mass - 1| = {worst:.2e}"),
        transcript,
    })
}

fn unfolding() -> Result<Outcome> {
    let t = table_for_height(&ModularParams::new(24, 2)?, 32, 1e-10, floor())?;
    let s = EisensteinSpec::new(1.0, 1e-14)?;
    let q = quad(1e-9);
    let d = inner_product_direct(&t, &s, &q)?;
    let u = inner_product_unfolded(&t, &s, &q, false)?;
    let c = inner_product_unfolded(&t, &s, &q, true)?;
    let closed = constant_term_closed_form(&t, &s)?;
    let gap = (d.value - u.value).norm() / d.value.norm();
    let cgap = (c.value - closed).norm() / closed.norm();
    Ok(Outcome {
        pass: gap < 1e-4 && cgap < 1e-8,
        detail: format!("direct vs unfolded {gap:.2e}, constant term vs closed form {cgap:.2e}"),
        transcript: format!("{d:?}\n{u:?}\n{c:?}\n{closed:?}\n"),
    })
}

fn valence() -> Result<Outcome> {
    let mut pass = true;
    let mut notes = Vec::new();
    let mut transcript = String::new();
    for k in [12u32, 16, 18, 20, 24, 36, 48] {
        let t = table_for_height(&ModularParams::new(k, 1)?, 32, 1e-10, floor())?;
        let inv = zero_inventory(&t, None, 1e-10)?;
        // v_inf + sum w v = k/12, compared as (num, den) cross products.
        let (a, b) = inv.total_weighted;
        let balanced = (inv.v_infinity as i64 * b + a) * 12 == i64::from(k) * b;
        pass &= inv.certified && balanced;
        if !(inv.certified && balanced) {
            notes.push(format!("k = {k} unbalanced"));
        }
        if k == 48 {
            let arc = inv.zeros.iter().filter(|z| z.locus == ZeroLocus::Arc).count();
            pass &= arc >= 3;
            notes.push(format!("k = 48 has {arc} arc zeros"));
        }
        transcript += &format!("{inv:?}\n");
    }
    Ok(Outcome {
        pass,
        detail: notes.join(", "),
        transcript,
    })
}

fn pkmm_trend() -> Result<Outcome> {
    let r = check_pkmm_limit(&[50, 100, 200, 400], Schedule::Linear(1.0), 1e-10)?;
    let t = r.trend.as_ref().expect("the limit check records a trend");
    let values: Vec<String> = t.values.iter().map(|v| format!("{v:.4}")).collect();
    Ok(Outcome {
        pass: r.pass,
        detail: format!(
            "|p - 1| = [{}], strictly decreasing: {}, slope {:.3}",
            values.join(", "),
            t.strictly_decreasing,
            t.slope
        ),
        transcript: format!("{r:?}"),
    })
}

fn envelopes() -> Result<Outcome> {
    let (nu, xf, xg) = envelope_grid();
    let r = check_bessel_envelopes(&nu, &xf, &xg)?;
    Ok(Outcome {
        pass: r.pass && r.sup_ratio <= 10.0,
        detail: format!("sup ratio {:.3} over {} points {}", r.sup_ratio, r.tuples, r.notes.join(", ")),
        transcript: format!("{r:?}"),
    })
}

fn equidistribution() -> Result<Outcome> {
    let ks = [60u32, 120, 180];
    let mut pass = true;
    let mut notes = Vec::new();
    let mut transcript = String::new();
    for schedule in [Schedule::Fixed(1), Schedule::KLogK] {
        let mass = check_mass_convergence(&ks, schedule, &default_bumps(), 1e-10)?;
        let zeros = check_zero_equidistribution(&ks, schedule, &default_partition(), 1e-10, 1e-10)?;
        let mt = mass.trend.as_ref().expect("mass check records a trend");
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ");
        notes.push(format!(
            "{schedule}: mass [{}] {}, zeros [{}] {}",
            fmt(&mt.values),
            if mass.pass { "ok" } else { "wrong pattern" },
            fmt(&zeros.trend.values),
            if zeros.pass { "ok" } else { "wrong pattern" },
        ));
        pass &= mass.pass && zeros.pass;
        transcript += &format!("{mass:?}\n{zeros:?}\n");
    }
    Ok(Outcome {
        pass,
        detail: notes.join("; "),
        transcript,
    })
}

type Criterion = (u32, &'static str, Duration, fn() -> Result<Outcome>);

const CRITERIA: [Criterion; 9] = [
    (1, "Kloosterman exactness", Duration::from_secs(120), kloosterman),
    (2, "coefficient oracle equivalence", Duration::from_secs(60), oracle_equivalence),
    (3, "Delta proportionality", Duration::from_secs(10), delta_proportionality),
    (4, "mass normalization", Duration::from_secs(300), mass_normalization),
    (5, "unfolding identity", Duration::from_secs(180), unfolding),
    (6, "valence formula", Duration::from_secs(300), valence),
    (7, "p(m) -> 1 trend", Duration::from_secs(120), pkmm_trend),
    (8, "Bessel envelopes", Duration::from_secs(60), envelopes),
    (9, "equidistribution pattern", Duration::from_secs(1200), equidistribution),
];

struct Run {
    transcripts: Vec<String>,
    lines: Vec<(bool, String)>,
}

fn run_all(threads: usize, report: bool) -> Run {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    pool.install(|| {
        let mut run = Run {
            transcripts: Vec::new(),
            lines: Vec::new(),
        };
        for (id, name, limit, f) in CRITERIA {
            let start = Instant::now();
            let result = f();
            let elapsed = start.elapsed();
            let (pass, detail, transcript) = match result {
                Ok(o) => (o.pass && elapsed < limit, o.detail, o.transcript),
                Err(e) => (false, format!("error: {e}"), format!("error: {e}")),
            };
            let line = format!(
                "criterion {id:>2} {}: {name} ({:.1} s, limit {} s): {detail}",
                if pass { "PASS" } else { "FAIL" },
                elapsed.as_secs_f64(),
                limit.as_secs()
            );
            if report {
                println!("{line}");
            }
            run.lines.push((pass, line));
            run.transcripts.push(transcript);
        }
        run
    })
}

fn main() {
    // `cargo test -- --list` and filters probe the harness; answer quietly.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let first = run_all(8, true);
    let second = run_all(8, false);
    let single = run_all(1, false);
    let mismatched: Vec<usize> = (0..CRITERIA.len())
        .filter(|&i| first.transcripts[i] != second.transcripts[i] || first.transcripts[i] != single.transcripts[i])
        .map(|i| i + 1)
        .collect();
    let det = mismatched.is_empty();
    println!(
        "criterion 10 {}: determinism across two runs and 1 vs 8 threads: {}",
        if det { "PASS" } else { "FAIL" },
        if det {
            "all transcripts byte-identical".to_string()
        } else {
            format!("criteria {mismatched:?} differ")
        }
    );
    let passed = first.lines.iter().filter(|l| l.0).count() + usize::from(det);
    println!("{passed}/10 criteria passed");
    if passed < 10 && std::env::var("PKM_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
