use std::path::Path;

use serde::Serialize;

use wehrl_lab::closed_forms::{
    hypothesis_entropy, i_n_oa_legendre, i_n_oa_triple_sum, i_p_basis_closed, i_p_oa_hypothesis,
    i_p_oa_integral_rep, orbit_param_a, s_cl_basis, s_cl_j1, stratum_representative,
};
use wehrl_lab::conjectures::{
    basis_scan, beta_scan, coherence_witness, coherent_entropy, coherent_moment, haar_sample,
    jensen_identity_check, minimize_entropy, scan_states, ScanReport,
};
use wehrl_lab::sphere::DEFAULT_PDERIV_STEP;
use wehrl_lab::{
    random_haar_state, square_integrability_check, GridSize, HalfInt, HusimiKernel, SphereGrid,
    SpinState, Weight,
};

use crate::output::{cell, opt_cell, render, Table};
use crate::{Common, Failure, ScanKind, Suite};

type Rendered = Result<String, Failure>;

pub fn validate(c: &Common) -> Result<(), Failure> {
    HalfInt::spin(c.two_j)
        .map_err(|_| Failure::Usage(format!("--two-j must be in 1..=25, got {}", c.two_j)))?;
    if c.n_theta < 2 || c.n_phi < 2 {
        return Err(Failure::Usage(format!(
            "grid sizes must be at least 2, got {}x{}",
            c.n_theta, c.n_phi
        )));
    }
    if let Some(&p) = c.p.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
        return Err(Failure::Usage(format!(
            "--p entries must be positive, got {p}"
        )));
    }
    if let Some(&a) = c.a.iter().find(|a| !a.is_finite()) {
        return Err(Failure::Usage(format!(
            "--a entries must be finite, got {a}"
        )));
    }
    if c.count == Some(0) {
        return Err(Failure::Usage("--count must be at least 1".into()));
    }
    Ok(())
}

fn spin(c: &Common) -> HalfInt {
    HalfInt::spin(c.two_j).expect("validated")
}

fn grid(c: &Common) -> Result<SphereGrid, Failure> {
    Ok(SphereGrid::gauss_legendre(c.n_theta, c.n_phi)?)
}

fn finite(x: f64, what: &str) -> Result<f64, Failure> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Failure::Numerical(format!("{what} is not finite")))
    }
}

fn load_state(path: &Path) -> Result<SpinState, Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::Usage(format!("cannot read state file {}: {e}", path.display())))?;
    SpinState::from_json(&bytes)
        .map_err(|e| Failure::Usage(format!("invalid state file {}: {e}", path.display())))
}

/// The states a command acts on: one from a file, or J = 1 stratum
/// representatives for each `--a`.
fn targets(c: &Common, state: Option<&Path>) -> Result<Vec<(SpinState, Option<f64>)>, Failure> {
    match (state, c.a.is_empty()) {
        (Some(_), false) => Err(Failure::Usage(
            "give either --state or --a, not both".into(),
        )),
        (None, true) => Err(Failure::Usage("give --state FILE or --a VALUES".into())),
        (Some(path), true) => {
            let u = load_state(path)?;
            let a = if u.j().twice() == 2 {
                Some(orbit_param_a(&u)?.value())
            } else {
                None
            };
            Ok(vec![(u, a)])
        }
        (None, false) => {
            if c.two_j != 2 {
                return Err(Failure::Usage(
                    "--a describes J = 1 states; use --two-j 2".into(),
                ));
            }
            c.a.iter()
                .map(|&a| Ok((stratum_representative(a)?, Some(a))))
                .collect()
        }
    }
}

#[derive(Serialize)]
struct EntropyRow {
    two_j: i32,
    a: Option<f64>,
    s_direct: f64,
    s_pderiv: f64,
    s_closed: Option<f64>,
    lieb_margin: f64,
    err_direct: f64,
    err_pderiv: f64,
}

#[derive(Serialize)]
struct GridRows<R> {
    grid: GridSize,
    rows: Vec<R>,
}

pub fn entropy(c: &Common, state: Option<&Path>) -> Rendered {
    let targets = targets(c, state)?;
    let grid = grid(c)?;
    let j = targets[0].0.j();
    let kernel = HusimiKernel::new(j, &grid, Weight::Plus)?;
    let fine = HusimiKernel::new(j, &grid.refined(), Weight::Plus)?;
    let mut rows = Vec::new();
    for (u, a) in &targets {
        let s_direct = finite(kernel.entropy(u)?, "entropy")?;
        let s_pderiv = finite(kernel.entropy_pderiv(u, DEFAULT_PDERIV_STEP)?, "entropy")?;
        rows.push(EntropyRow {
            two_j: j.twice(),
            a: *a,
            s_direct,
            s_pderiv,
            s_closed: a.map(s_cl_j1).transpose()?,
            lieb_margin: s_direct - coherent_entropy(j),
            err_direct: (fine.entropy(u)? - s_direct).abs(),
            err_pderiv: (fine.entropy_pderiv(u, DEFAULT_PDERIV_STEP)? - s_pderiv).abs(),
        });
    }
    let value = GridRows {
        grid: grid.size(),
        rows,
    };
    render(c.format, &value, || {
        let mut t = Table::new(&[
            "two_j",
            "a",
            "s_direct",
            "s_pderiv",
            "s_closed",
            "lieb_margin",
            "err_direct",
            "err_pderiv",
        ]);
        for r in &value.rows {
            t.push(vec![
                r.two_j.to_string(),
                opt_cell(r.a),
                cell(r.s_direct),
                cell(r.s_pderiv),
                opt_cell(r.s_closed),
                cell(r.lieb_margin),
                cell(r.err_direct),
                cell(r.err_pderiv),
            ]);
        }
        t
    })
}

#[derive(Serialize)]
struct MomentRow {
    two_j: i32,
    a: Option<f64>,
    p: f64,
    value: f64,
    err_estimate: f64,
    closed_form: Option<f64>,
    coherent_bound: f64,
    margin: f64,
}

pub fn moment(c: &Common, state: Option<&Path>) -> Rendered {
    let targets = targets(c, state)?;
    let p_values = if c.p.is_empty() {
        vec![2.0]
    } else {
        c.p.clone()
    };
    let grid = grid(c)?;
    let j = targets[0].0.j();
    let kernel = HusimiKernel::new(j, &grid, Weight::Plus)?;
    let fine = HusimiKernel::new(j, &grid.refined(), Weight::Plus)?;
    let mut rows = Vec::new();
    for (u, a) in &targets {
        for &p in &p_values {
            let value = finite(kernel.moment(u, p)?, "moment")?;
            let bound = coherent_moment(j, p);
            rows.push(MomentRow {
                two_j: j.twice(),
                a: *a,
                p,
                value,
                err_estimate: (fine.moment(u, p)? - value).abs(),
                closed_form: a.map(|a| i_p_oa_hypothesis(p, a)).transpose()?,
                coherent_bound: bound,
                margin: bound - value,
            });
        }
    }
    let value = GridRows {
        grid: grid.size(),
        rows,
    };
    render(c.format, &value, || {
        let mut t = Table::new(&[
            "two_j",
            "a",
            "p",
            "value",
            "err_estimate",
            "closed_form",
            "coherent_bound",
            "margin",
        ]);
        for r in &value.rows {
            t.push(vec![
                r.two_j.to_string(),
                opt_cell(r.a),
                cell(r.p),
                cell(r.value),
                cell(r.err_estimate),
                opt_cell(r.closed_form),
                cell(r.coherent_bound),
                cell(r.margin),
            ]);
        }
        t
    })
}

#[derive(Serialize)]
struct BasisTableRow {
    m: f64,
    p: f64,
    i_p_closed: f64,
    i_p_quadrature: f64,
    i_p_diff: f64,
    s_cl_closed: f64,
    s_cl_quadrature: f64,
    s_cl_diff: f64,
}

#[derive(Serialize)]
struct BasisTable {
    two_j: i32,
    grid: GridSize,
    rows: Vec<BasisTableRow>,
}

pub fn basis_table(c: &Common) -> Rendered {
    let j = spin(c);
    let p_values = if c.p.is_empty() {
        vec![2.0]
    } else {
        c.p.clone()
    };
    let grid = grid(c)?;
    let kernel = HusimiKernel::new(j, &grid, Weight::Plus)?;
    let mut rows = Vec::new();
    for m in j.projections() {
        let v = SpinState::basis(j, m)?;
        let s_closed = s_cl_basis(j, m)?;
        let s_quad = finite(kernel.entropy(&v)?, "entropy")?;
        for &p in &p_values {
            let i_closed = i_p_basis_closed(j, m, p)?;
            let i_quad = finite(kernel.moment(&v, p)?, "moment")?;
            rows.push(BasisTableRow {
                m: m.value(),
                p,
                i_p_closed: i_closed,
                i_p_quadrature: i_quad,
                i_p_diff: i_quad - i_closed,
                s_cl_closed: s_closed,
                s_cl_quadrature: s_quad,
                s_cl_diff: s_quad - s_closed,
            });
        }
    }
    let value = BasisTable {
        two_j: j.twice(),
        grid: grid.size(),
        rows,
    };
    render(c.format, &value, || {
        let mut t = Table::new(&[
            "two_j",
            "m",
            "p",
            "i_p_closed",
            "i_p_quadrature",
            "i_p_diff",
            "s_cl_closed",
            "s_cl_quadrature",
            "s_cl_diff",
        ]);
        for r in &value.rows {
            t.push(vec![
                value.two_j.to_string(),
                cell(r.m),
                cell(r.p),
                cell(r.i_p_closed),
                cell(r.i_p_quadrature),
                cell(r.i_p_diff),
                cell(r.s_cl_closed),
                cell(r.s_cl_quadrature),
                cell(r.s_cl_diff),
            ]);
        }
        t
    })
}

#[derive(Serialize)]
struct GridScan<R> {
    kind: &'static str,
    tolerance: f64,
    min_margin: f64,
    violations: usize,
    rows: Vec<R>,
}

fn violation_verdict(count: usize, min: f64, tolerance: f64) -> Result<(), Failure> {
    if count == 0 {
        Ok(())
    } else {
        Err(Failure::Violation(format!(
            "{count} margin(s) below {:e}; minimum {min:e}",
            -tolerance
        )))
    }
}

pub fn scan(
    c: &Common,
    kind: ScanKind,
    b: &[f64],
    tolerance: f64,
) -> Result<(String, Result<(), Failure>), Failure> {
    if !tolerance.is_finite() {
        return Err(Failure::Usage("--tolerance must be finite".into()));
    }
    match kind {
        ScanKind::Lieb => {
            let j = spin(c);
            let states = haar_sample(j, c.count.unwrap_or(1000), c.seed)?;
            let report = scan_states(j, &states, c.seed, &c.p, &grid(c)?, tolerance)?;
            finite(report.min_margin, "minimum margin")?;
            let verdict = violation_verdict(report.violations.len(), report.min_margin, tolerance);
            Ok((render_report(c, &report)?, verdict))
        }
        ScanKind::Beta => {
            let a_values = if c.a.is_empty() {
                (1..=10).map(|i| 0.5 * f64::from(i)).collect()
            } else {
                c.a.clone()
            };
            let p_values = if c.p.is_empty() {
                vec![1.5, 2.0, 3.0]
            } else {
                c.p.clone()
            };
            let rows = if b.is_empty() {
                let mut rows = Vec::new();
                for &a in &a_values {
                    rows.extend(beta_scan(&[a], &[a], &p_values)?);
                }
                rows
            } else {
                beta_scan(&a_values, b, &p_values)?
            };
            let min = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
            let count = rows.iter().filter(|r| r.margin < -tolerance).count();
            let value = GridScan {
                kind: "beta",
                tolerance,
                min_margin: finite(min, "minimum margin")?,
                violations: count,
                rows,
            };
            let text = render(c.format, &value, || {
                let mut t = Table::new(&["a", "b", "p", "margin"]);
                for r in &value.rows {
                    t.push(vec![cell(r.a), cell(r.b), cell(r.p), cell(r.margin)]);
                }
                t
            })?;
            Ok((text, violation_verdict(count, min, tolerance)))
        }
        ScanKind::Generalized => {
            let p_values = if c.p.is_empty() {
                vec![1.5, 2.0, 3.0]
            } else {
                c.p.clone()
            };
            let two_js: Vec<i32> = (1..=c.two_j).collect();
            let mut grid = grid(c)?;
            let mut rows = basis_scan(&two_js, &p_values, &grid)?;
            if rows.iter().any(|r| r.margin < -tolerance) {
                grid = grid.doubled();
                rows = basis_scan(&two_js, &p_values, &grid)?;
            }
            let min = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
            let count = rows.iter().filter(|r| r.margin < -tolerance).count();
            let value = GridScan {
                kind: "generalized",
                tolerance,
                min_margin: finite(min, "minimum margin")?,
                violations: count,
                rows,
            };
            let text = render(c.format, &value, || {
                let mut t = Table::new(&["two_j", "m", "p", "margin"]);
                for r in &value.rows {
                    t.push(vec![
                        r.two_j.to_string(),
                        cell(r.m),
                        cell(r.p),
                        cell(r.margin),
                    ]);
                }
                t
            })?;
            Ok((text, violation_verdict(count, min, tolerance)))
        }
    }
}

fn render_report(c: &Common, r: &ScanReport) -> Rendered {
    render(c.format, r, || {
        let mut t = Table::new(&[
            "j",
            "sample_count",
            "seed",
            "n_theta",
            "n_phi",
            "min_margin",
            "violations",
        ]);
        t.push(vec![
            r.j.to_string(),
            r.sample_count.to_string(),
            r.seed.to_string(),
            r.grid.0.to_string(),
            r.grid.1.to_string(),
            cell(r.min_margin),
            r.violations.len().to_string(),
        ]);
        t
    })
}

#[derive(Serialize)]
struct Check {
    check: &'static str,
    max_deviation: f64,
    contract: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    suite: &'static str,
    grid: GridSize,
    checks: Vec<Check>,
}

fn tenths(from: u32, to: u32) -> impl Iterator<Item = f64> {
    (from..=to).map(|i| f64::from(i) / 10.0)
}

fn max_over<I: IntoIterator<Item = Result<f64, Failure>>>(devs: I) -> Result<f64, Failure> {
    let mut worst: f64 = 0.0;
    for d in devs {
        let d = d?;
        if !d.is_finite() {
            return Ok(f64::INFINITY);
        }
        worst = worst.max(d);
    }
    Ok(worst)
}

pub fn verify(
    c: &Common,
    suite: Suite,
    tolerance: Option<f64>,
) -> Result<(String, Result<(), Failure>), Failure> {
    let grid = grid(c)?;
    let one = HalfInt::spin(2).expect("valid");
    let kernel = HusimiKernel::new(one, &grid, Weight::Plus)?;
    let stratum_moment = |n: f64, a: f64| -> Result<f64, Failure> {
        Ok(kernel.moment(&stratum_representative(a)?, n)?)
    };
    let mut raw: Vec<(&'static str, f64, f64)> = Vec::new();
    let suite_name =
        match suite {
            Suite::Identities => {
                let pairs = (1..=10u32).flat_map(|n| tenths(0, 10).map(move |a| (n, a)));
                raw.push((
                    "triple_sum_vs_legendre",
                    max_over(pairs.map(|(n, a)| {
                        Ok((i_n_oa_triple_sum(n, a)? - i_n_oa_legendre(n, a)?).abs())
                    }))?,
                    1e-8,
                ));
                let pairs = (1..=6u32).flat_map(|n| tenths(0, 10).map(move |a| (n, a)));
                raw.push((
                    "legendre_vs_quadrature",
                    max_over(pairs.map(|(n, a)| {
                        Ok((i_n_oa_legendre(n, a)? - stratum_moment(f64::from(n), a)?).abs())
                    }))?,
                    1e-8,
                ));
                raw.push((
                    "jensen_identity",
                    max_over((0..=10).map(|k| Ok(jensen_identity_check(0.5 * f64::from(k))?)))?,
                    1e-10,
                ));
                let mut norm = Vec::new();
                let mut square = Vec::new();
                // The overlap density is a trigonometric polynomial of degree 2J
                // in each angle, so a small product rule integrates it exactly.
                let small = SphereGrid::gauss_legendre(12, 24)?;
                for two_j in 1..=4 {
                    let j = HalfInt::spin(two_j)?;
                    let k = HusimiKernel::new(j, &grid, Weight::Plus)?;
                    for i in 0..3u64 {
                        let seed = c.seed.wrapping_add(100 * two_j as u64 + 2 * i);
                        let u = random_haar_state(j, seed)?;
                        let v = random_haar_state(j, seed + 1)?;
                        norm.push(Ok((k.moment(&u, 1.0)? - 1.0).abs()));
                        square.push(Ok((square_integrability_check(&u, &v, &small)? - 1.0).abs()));
                    }
                }
                raw.push(("normalization", max_over(norm)?, 1e-10));
                raw.push(("square_integrability", max_over(square)?, 1e-8));
                "identities"
            }
            Suite::Hypothesis => {
                let pairs = (1..=6u32).flat_map(|n| tenths(0, 10).map(move |a| (n, a)));
                raw.push((
                    "hypothesis_vs_legendre",
                    max_over(pairs.map(|(n, a)| {
                        Ok((i_p_oa_hypothesis(f64::from(n), a)? - i_n_oa_legendre(n, a)?).abs())
                    }))?,
                    1e-9,
                ));
                let real = [1.25, 1.5, 2.5, 3.75];
                let pairs = real.iter().flat_map(|&p| tenths(1, 9).map(move |a| (p, a)));
                raw.push((
                    "hypothesis_vs_quadrature",
                    max_over(pairs.map(|(p, a)| {
                        Ok((i_p_oa_hypothesis(p, a)? - stratum_moment(p, a)?).abs())
                    }))?,
                    1e-7,
                ));
                let pairs = real.iter().flat_map(|&p| tenths(1, 9).map(move |a| (p, a)));
                raw.push((
                    "integral_rep_vs_hypothesis",
                    max_over(pairs.map(|(p, a)| {
                        Ok((i_p_oa_integral_rep(p, a)? - i_p_oa_hypothesis(p, a)?).abs())
                    }))?,
                    1e-9,
                ));
                raw.push((
                    "hypothesis_entropy_vs_stratum_formula",
                    max_over(tenths(0, 10).map(|a| {
                        Ok((hypothesis_entropy(a, DEFAULT_PDERIV_STEP)? - s_cl_j1(a)?).abs())
                    }))?,
                    1e-6,
                ));
                "hypothesis"
            }
        };
    let checks: Vec<Check> = raw
        .into_iter()
        .map(|(check, max_deviation, contract)| {
            let contract = tolerance.unwrap_or(contract);
            Check {
                check,
                max_deviation,
                contract,
                pass: max_deviation < contract,
            }
        })
        .collect();
    let failed: Vec<&str> = checks
        .iter()
        .filter(|ch| !ch.pass)
        .map(|ch| ch.check)
        .collect();
    let value = VerifyReport {
        suite: suite_name,
        grid: grid.size(),
        checks,
    };
    let text = render(c.format, &value, || {
        let mut t = Table::new(&["check", "max_deviation", "contract", "pass"]);
        for ch in &value.checks {
            t.push(vec![
                ch.check.to_string(),
                cell(ch.max_deviation),
                cell(ch.contract),
                ch.pass.to_string(),
            ]);
        }
        t
    })?;
    let verdict = if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerical(format!(
            "deviation above contract: {}",
            failed.join(", ")
        )))
    };
    Ok((text, verdict))
}

#[derive(Serialize)]
struct MinimizeReport {
    two_j: i32,
    restarts: usize,
    seed: u64,
    grid: GridSize,
    entropy: f64,
    coherent_entropy: f64,
    gap: f64,
    witness: f64,
    converged: bool,
    state: SpinState,
}

pub fn minimize(c: &Common) -> Rendered {
    let j = spin(c);
    let grid = grid(c)?;
    let restarts = c.count.unwrap_or(3);
    let r = minimize_entropy(j, restarts, c.seed, &grid)?;
    let entropy = finite(r.entropy, "entropy")?;
    let value = MinimizeReport {
        two_j: j.twice(),
        restarts,
        seed: c.seed,
        grid: grid.size(),
        entropy,
        coherent_entropy: coherent_entropy(j),
        gap: entropy - coherent_entropy(j),
        witness: coherence_witness(&r.state, &grid)?,
        converged: r.converged,
        state: r.state,
    };
    render(c.format, &value, || {
        let mut t = Table::new(&[
            "two_j",
            "entropy",
            "coherent_entropy",
            "gap",
            "witness",
            "converged",
        ]);
        t.push(vec![
            value.two_j.to_string(),
            cell(value.entropy),
            cell(value.coherent_entropy),
            cell(value.gap),
            cell(value.witness),
            value.converged.to_string(),
        ]);
        t
    })
}
