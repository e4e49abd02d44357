//! Derivative-free simplex descent (Nelder-Mead) with dimension-adaptive
//! coefficients.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadConfig {
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Stop when the spread of simplex values is at most this.
    pub f_tol: f64,
    /// and every vertex is within this distance (max norm) of the best one.
    pub x_tol: f64,
    pub max_evals: usize,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            f_tol: 1e-13,
            x_tol: 1e-8,
            max_evals: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    /// False when the evaluation budget ran out before the simplex collapsed.
    pub converged: bool,
}

/// Minimizes `f` from `x0`. Non-finite objective values are treated as
/// `+inf`. Deterministic: ties are broken by vertex order.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    cfg: &NelderMeadConfig,
) -> NelderMeadResult {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    if n == 0 {
        let v = eval(x0, &mut evals);
        return NelderMeadResult {
            x: Vec::new(),
            f: v,
            evals,
            converged: true,
        };
    }

    let nf = n as f64;
    let alpha = 1.0;
    let beta = 1.0 + 2.0 / nf;
    let gamma = 0.75 - 1.0 / (2.0 * nf);
    let delta = 1.0 - 1.0 / nf;

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += cfg.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();

    let point = |base: &[f64], dir: &[f64], t: f64| -> Vec<f64> {
        base.iter().zip(dir).map(|(b, d)| b + t * (d - b)).collect()
    };

    let mut converged = false;
    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let size = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= cfg.f_tol && size <= cfg.x_tol {
            converged = true;
            break;
        }
        if evals >= cfg.max_evals {
            break;
        }

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / nf;
            }
        }
        let worst = simplex[n].clone();
        let reflected = point(&centroid, &worst, -alpha);
        let fr = eval(&reflected, &mut evals);
        if fr < values[0] {
            let expanded = point(&centroid, &worst, -alpha * beta);
            let fe = eval(&expanded, &mut evals);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let c = point(&centroid, &worst, -alpha * gamma);
            let fc = eval(&c, &mut evals);
            (c, fc)
        } else {
            let c = point(&centroid, &worst, gamma);
            let fc = eval(&c, &mut evals);
            (c, fc)
        };
        if fc < fr.min(values[n]) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            simplex[i] = point(&best, &simplex[i], delta);
            values[i] = eval(&simplex[i], &mut evals);
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))
        .expect("simplex is nonempty");
    NelderMeadResult {
        x: simplex[best].clone(),
        f: values[best],
        evals,
        converged,
    }
}
