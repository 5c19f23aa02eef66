//! One function per subcommand, each returning a [`Report`].

use poincare_lab::cache::load_or_build;
use poincare_lab::config;
use poincare_lab::diagnostics::{
    check_bessel_envelopes, check_kloosterman_bound, check_mass_convergence, check_pkmm_limit, check_pkmn_bound,
    check_smn_split, check_zero_equidistribution, default_bumps, envelope_grid, smn_grid, BoundReport, Schedule,
};
use poincare_lab::poincare::{
    evaluate_with_error, mass_integral, petersson_norm_log, CoefficientEntry, CoefficientTable, FourierRow,
    ModularParams, ModularPoint, QuadSpec, Region,
};
use poincare_lab::spectral::{constant_term_closed_form, inner_product_direct, inner_product_unfolded, EisensteinSpec};
use poincare_lab::zeros::{default_partition, zero_inventory};
use poincare_lab::{Error, Result};
use serde::Serialize;

use crate::output::{num, Report};
use crate::{Bound, Cli, Command, Measure, Mode};

/// Longest table grown for a requested height.
const MAX_TABLE: u64 = 1 << 16;

pub fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Coeff { k, m, n_max } => coeff(*k, *m, *n_max),
        Command::Eval { k, m, x, y } => eval(*k, *m, *x, *y),
        Command::Norm { k, m } => norm(*k, *m),
        Command::Mass { k, m, region, rel_tol } => mass(*k, *m, region, *rel_tol),
        Command::Inner {
            k,
            m,
            t,
            mode,
            constant_only,
            rel_tol,
        } => inner(*k, *m, *t, *mode, *constant_only, *rel_tol),
        Command::Zeros { k, m, refine_tol, y_max } => zeros(*k, *m, *refine_tol, *y_max),
        Command::Verify {
            bound,
            c_max,
            mn_max,
            k_list,
            schedule,
        } => verify(*bound, *c_max, *mn_max, k_list.as_deref(), schedule.as_deref()),
        Command::Equidist {
            schedule,
            k_list,
            measure,
        } => equidist(schedule, k_list, *measure),
    }
}

fn cached(params: &ModularParams, n_max: u64) -> Result<CoefficientTable> {
    let cfg = config::global();
    let (table, hit) = load_or_build(&cfg.cache_dir, params, n_max, cfg.default_tol, cfg.precision_bits)?;
    if hit {
        eprintln!("cache hit: k = {}, m = {}, n <= {n_max}", params.k, params.m);
    }
    if let Some(f) = &table.failure {
        return Err(Error::Precision(format!("coefficient n = {} failed: {}", f.n, f.error)));
    }
    Ok(table)
}

/// A cached table long enough for the series at height `y`.
fn table_at(params: &ModularParams, y: f64) -> Result<CoefficientTable> {
    let mut n = 32;
    loop {
        let table = cached(params, n)?;
        match FourierRow::new(&table, y) {
            Ok(_) => return Ok(table),
            Err(Error::TableTooShort { .. }) if n < MAX_TABLE => n *= 2,
            Err(e) => return Err(e),
        }
    }
}

fn floor_height() -> f64 {
    0.75f64.sqrt()
}

#[derive(Serialize)]
struct CoeffRow {
    n: u64,
    sign: i8,
    log_mag: f64,
    value: f64,
    relative_tail: f64,
    c_max: u64,
}

impl From<&CoefficientEntry> for CoeffRow {
    fn from(e: &CoefficientEntry) -> Self {
        CoeffRow {
            n: e.n,
            sign: e.value.sign(),
            log_mag: e.value.log_mag(),
            value: e.value.to_f64(),
            relative_tail: e.relative_tail(),
            c_max: e.c_max,
        }
    }
}

impl CoeffRow {
    fn cells(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.sign.to_string(),
            num(self.log_mag),
            num(self.value),
            num(self.relative_tail),
            self.c_max.to_string(),
        ]
    }
}

fn coeff(k: u32, m: u64, n_max: u64) -> Result<Report> {
    #[derive(Serialize)]
    struct Out {
        k: u32,
        m: u64,
        tol: f64,
        precision_bits: u32,
        entries: Vec<CoeffRow>,
        anchor: Option<CoeffRow>,
    }
    let params = ModularParams::new(k, m)?;
    if n_max == 0 {
        return Err(Error::Domain("n-max must be at least 1".into()));
    }
    let table = cached(&params, n_max)?;
    let out = Out {
        k,
        m,
        tol: table.tol,
        precision_bits: table.precision_bits,
        entries: table.entries.iter().map(CoeffRow::from).collect(),
        anchor: table.anchor.as_ref().map(CoeffRow::from),
    };
    let rows = out.entries.iter().chain(out.anchor.iter()).map(CoeffRow::cells).collect();
    Ok(Report::new(
        &out,
        vec!["n", "sign", "log_mag", "value", "relative_tail", "c_max"],
        rows,
    ))
}

fn eval(k: u32, m: u64, x: f64, y: f64) -> Result<Report> {
    #[derive(Serialize)]
    struct Out {
        k: u32,
        m: u64,
        x: f64,
        y: f64,
        re: f64,
        im: f64,
        log_mag: f64,
        phase: f64,
        log_error: f64,
    }
    let params = ModularParams::new(k, m)?;
    let z = ModularPoint::new(x, y)?;
    // Below y = 1/2 the series is evaluated at the reduced point and carried
    // back with P(z) = (cz + d)^{-k} P(gamma z).
    let (w, (c, d)) = if y >= 0.5 { (z, (0, 1)) } else { z.reduce() };
    let table = table_at(&params, w.y.min(floor_height()))?;
    let (v, log_err) = evaluate_with_error(&table, &w)?;
    let (jr, ji) = (c as f64 * x + d as f64, c as f64 * y);
    let (ln_j, arg_j) = (0.5 * (jr * jr + ji * ji).ln(), ji.atan2(jr));
    let kf = f64::from(k);
    let log_mag = v.log_mag() - kf * ln_j;
    let phase = poincare_lab::special::logscalar::wrap_phase(v.phase() - kf * arg_j);
    let out = Out {
        k,
        m,
        x,
        y,
        re: log_mag.exp() * phase.cos(),
        im: log_mag.exp() * phase.sin(),
        log_mag,
        phase,
        log_error: log_err - kf * ln_j,
    };
    let rows = vec![vec![
        num(x),
        num(y),
        num(out.re),
        num(out.im),
        num(log_mag),
        num(phase),
        num(out.log_error),
    ]];
    Ok(Report::new(&out, vec!["x", "y", "re", "im", "log_mag", "phase", "log_error"], rows))
}

fn norm(k: u32, m: u64) -> Result<Report> {
    #[derive(Serialize)]
    struct Out {
        k: u32,
        m: u64,
        log_norm: f64,
        p_m: CoeffRow,
    }
    let params = ModularParams::new(k, m)?;
    let table = cached(&params, m.min(8))?;
    let ln = petersson_norm_log(&table)?.log_mag();
    let pm = table.get(m).expect("the norm needs p(m), which is present");
    let out = Out {
        k,
        m,
        log_norm: ln,
        p_m: pm.into(),
    };
    let rows = vec![vec![k.to_string(), m.to_string(), num(ln), num(pm.value.to_f64())]];
    Ok(Report::new(&out, vec!["k", "m", "log_norm", "p_m"], rows))
}

fn parse_region(s: &str) -> Result<Region> {
    if s == "full" {
        return Ok(Region::full());
    }
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| match p.trim() {
            "inf" => Ok(f64::INFINITY),
            v => v.parse().map_err(|_| Error::Domain(format!("bad region bound {v:?}"))),
        })
        .collect::<Result<_>>()?;
    if parts.len() != 4 {
        return Err(Error::Domain(format!("region needs 4 bounds, got {}", parts.len())));
    }
    Region::new(parts[0], parts[1], parts[2], parts[3])
}

fn mass(k: u32, m: u64, region: &str, rel_tol: f64) -> Result<Report> {
    #[derive(Serialize)]
    struct Out {
        k: u32,
        m: u64,
        region: Region,
        value: f64,
        error: f64,
    }
    let params = ModularParams::new(k, m)?;
    let region = parse_region(region)?;
    let table = table_at(&params, region.floor())?;
    let spec = QuadSpec {
        abs_tol: 0.0,
        rel_tol,
        max_depth: 40,
    };
    let r = mass_integral(&table, &region, &spec)?;
    let out = Out {
        k,
        m,
        region,
        value: r.value,
        error: r.error,
    };
    let rows = vec![vec![k.to_string(), m.to_string(), num(r.value), num(r.error)]];
    Ok(Report::new(&out, vec!["k", "m", "value", "error"], rows))
}

#[derive(Serialize)]
struct Pairing {
    re: f64,
    im: f64,
    error: f64,
}

fn inner(k: u32, m: u64, t: f64, mode: Mode, constant_only: bool, rel_tol: f64) -> Result<Report> {
    #[derive(Serialize)]
    struct Out {
        k: u32,
        m: u64,
        t: f64,
        constant_only: bool,
        direct: Option<Pairing>,
        unfolded: Option<Pairing>,
        closed_form: Option<Pairing>,
        relative_gap: Option<f64>,
    }
    let params = ModularParams::new(k, m)?;
    let spec = EisensteinSpec::new(t, config::global().default_tol)?;
    let quad = QuadSpec {
        abs_tol: 0.0,
        rel_tol,
        max_depth: 40,
    };
    let table = table_at(&params, floor_height())?;
    let mut out = Out {
        k,
        m,
        t,
        constant_only,
        direct: None,
        unfolded: None,
        closed_form: None,
        relative_gap: None,
    };
    let pairing = |v: (f64, f64), error: f64| Pairing { re: v.0, im: v.1, error };
    if constant_only {
        let u = inner_product_unfolded(&table, &spec, &quad, true)?;
        let c = constant_term_closed_form(&table, &spec)?;
        out.relative_gap = Some((u.value - c).norm() / c.norm());
        out.unfolded = Some(pairing((u.value.re, u.value.im), u.error));
        out.closed_form = Some(pairing((c.re, c.im), 0.0));
    } else {
        let d = if mode != Mode::Unfolded {
            Some(inner_product_direct(&table, &spec, &quad)?)
        } else {
            None
        };
        let u = if mode != Mode::Direct {
            Some(inner_product_unfolded(&table, &spec, &quad, false)?)
        } else {
            None
        };
        if let (Some(d), Some(u)) = (&d, &u) {
            out.relative_gap = Some((d.value - u.value).norm() / d.value.norm());
        }
        out.direct = d.map(|d| pairing((d.value.re, d.value.im), d.error));
        out.unfolded = u.map(|u| pairing((u.value.re, u.value.im), u.error));
    }
    let mut rows = Vec::new();
    for (name, p) in [("direct", &out.direct), ("unfolded", &out.unfolded), ("closed_form", &out.closed_form)] {
        if let Some(p) = p {
            rows.push(vec![name.to_string(), num(p.re), num(p.im), num(p.error)]);
        }
    }
    if let Some(g) = out.relative_gap {
        rows.push(vec!["relative_gap".into(), num(g), String::new(), String::new()]);
    }
    Ok(Report::new(&out, vec!["path", "re", "im", "error"], rows))
}

fn zeros(k: u32, m: u64, refine_tol: f64, y_max: Option<f64>) -> Result<Report> {
    let params = ModularParams::new(k, m)?;
    let table = table_at(&params, floor_height())?;
    let inv = zero_inventory(&table, y_max, refine_tol)?;
    let rows = inv
        .zeros
        .iter()
        .map(|z| {
            vec![
                format!("{:?}", z.locus),
                num(z.x),
                num(z.y),
                z.multiplicity.to_string(),
                format!("{}/{}", z.weight.0, z.weight.1),
            ]
        })
        .collect();
    if !inv.certified {
        eprintln!(
            "valence check failed: deficit {}/{} (even-order boundary zeros or precision loss)",
            inv.deficit.0, inv.deficit.1
        );
    }
    let passed = inv.certified;
    Ok(Report::new(&inv, vec!["locus", "x", "y", "multiplicity", "weight"], rows).passed(passed))
}

fn report_rows(reports: &[BoundReport]) -> Vec<Vec<String>> {
    reports
        .iter()
        .flat_map(|r| {
            r.points.iter().map(move |p| {
                vec![
                    r.bound_id.clone(),
                    p.grid.iter().map(|g| num(*g)).collect::<Vec<_>>().join(";"),
                    num(p.lhs.log_mag()),
                    num(p.rhs.log_mag()),
                    num(p.ratio),
                    r.pass.to_string(),
                ]
            })
        })
        .collect()
}

const REPORT_HEADER: [&str; 6] = ["bound_id", "grid", "lhs_log", "rhs_log", "ratio", "pass"];

fn verify(bound: Bound, c_max: u64, mn_max: u64, k_list: Option<&[u32]>, schedule: Option<&str>) -> Result<Report> {
    let tol = config::global().default_tol;
    let sched = |default: Schedule| schedule.map_or(Ok(default), Schedule::parse);
    let reports = match bound {
        Bound::Kloosterman => vec![check_kloosterman_bound(c_max, mn_max)?],
        Bound::BesselEnvelope => {
            let (nu, xf, xg) = envelope_grid();
            vec![check_bessel_envelopes(&nu, &xf, &xg)?]
        }
        Bound::Smn => check_smn_split(&smn_grid(k_list.unwrap_or(&[16, 24, 40]), mn_max.min(8)), tol)?,
        Bound::Pkmn => {
            let grid: Vec<_> = smn_grid(k_list.unwrap_or(&[16, 24, 40]), mn_max.min(8))
                .into_iter()
                .filter(|t| t.1 != t.2)
                .collect();
            vec![check_pkmn_bound(&grid, tol)?]
        }
        Bound::Pkmm => vec![check_pkmm_limit(
            k_list.unwrap_or(&[50, 100, 200, 400]),
            sched(Schedule::Linear(1.0))?,
            tol,
        )?],
        Bound::MassConvergence => vec![check_mass_convergence(
            k_list.unwrap_or(&[60, 120, 180]),
            sched(Schedule::KLogK)?,
            &default_bumps(),
            tol,
        )?],
    };
    let passed = reports.iter().all(|r| r.pass);
    Ok(Report::new(&reports, REPORT_HEADER.to_vec(), report_rows(&reports)).passed(passed))
}

fn equidist(schedule: &str, k_list: &[u32], measure: Measure) -> Result<Report> {
    #[derive(Serialize)]
    struct Out {
        schedule: Schedule,
        mass: Option<BoundReport>,
        zeros: Option<poincare_lab::diagnostics::ZeroEquidistReport>,
    }
    let schedule = Schedule::parse(schedule)?;
    let tol = config::global().default_tol;
    let mass = if measure != Measure::Zeros {
        Some(check_mass_convergence(k_list, schedule, &default_bumps(), tol)?)
    } else {
        None
    };
    let zeros = if measure != Measure::Mass {
        Some(check_zero_equidistribution(k_list, schedule, &default_partition(), 1e-10, tol)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    if let Some(r) = &mass {
        for p in &r.points {
            // grid = [k, m, bump index, observed mass]
            rows.push(vec![
                "mass".into(),
                (p.grid[0] as u64).to_string(),
                (p.grid[1] as u64).to_string(),
                (p.grid[2] as u64).to_string(),
                num(p.grid[3]),
                num(p.rhs.to_f64()),
            ]);
        }
    }
    if let Some(z) = &zeros {
        for row in &z.rows {
            for (i, c) in row.cells.iter().enumerate() {
                rows.push(vec![
                    "zeros".into(),
                    row.params.k.to_string(),
                    row.params.m.to_string(),
                    i.to_string(),
                    num(c.observed),
                    num(c.expected),
                ]);
            }
        }
    }
    let passed = mass.as_ref().map_or(true, |r| r.pass) && zeros.as_ref().map_or(true, |z| z.pass);
    let out = Out { schedule, mass, zeros };
    Ok(Report::new(&out, vec!["measure", "k", "m", "cell", "observed", "expected"], rows).passed(passed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regions_parse() {
        assert_eq!(parse_region("full").unwrap(), Region::full());
        let r = parse_region("-0.5, 0.5, 1, inf").unwrap();
        assert_eq!((r.x_lo, r.x_hi, r.y_lo), (-0.5, 0.5, 1.0));
        assert!(r.y_hi.is_infinite());
        assert!(matches!(parse_region("0,1"), Err(Error::Domain(_))));
        assert!(matches!(parse_region("a,b,c,d"), Err(Error::Domain(_))));
    }
}
