//! Box-constrained Nelder–Mead maximisation in two dimensions.

/// Axis-aligned box `[lo, hi]` per coordinate.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Bounds {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Bounds {
    pub fn clamp(&self, x: [f64; 2]) -> [f64; 2] {
        [x[0].clamp(self.lo[0], self.hi[0]), x[1].clamp(self.lo[1], self.hi[1])]
    }
}

pub(crate) struct SimplexSettings {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    pub max_evals: usize,
    pub x_tol: f64,
}

impl Default for SimplexSettings {
    fn default() -> Self {
        Self { reflection: 1.0, expansion: 2.0, contraction: 0.5, shrink: 0.5, max_evals: 200, x_tol: 1e-7 }
    }
}

/// Maximises `f` starting from the simplex `start, start + steps[i] e_i`.
///
/// Every trial point is projected into `bounds` before evaluation. Returns the
/// best point and value seen.
pub(crate) fn maximize<F: FnMut([f64; 2]) -> f64>(
    mut f: F,
    start: [f64; 2],
    steps: [f64; 2],
    bounds: &Bounds,
    cfg: &SimplexSettings,
) -> ([f64; 2], f64) {
    let mut evals = 0usize;
    let mut eval = |x: [f64; 2], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    };
    let mut simplex: Vec<([f64; 2], f64)> = Vec::with_capacity(3);
    let x0 = bounds.clamp(start);
    simplex.push((x0, eval(x0, &mut evals)));
    for i in 0..2 {
        let mut x = x0;
        x[i] += steps[i];
        if x[i] > bounds.hi[i] {
            x[i] = x0[i] - steps[i];
        }
        let x = bounds.clamp(x);
        simplex.push((x, eval(x, &mut evals)));
    }

    while evals < cfg.max_evals {
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let spread = (0..2)
            .map(|i| {
                let v: Vec<f64> = simplex.iter().map(|s| s.0[i]).collect();
                v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        if spread < cfg.x_tol {
            break;
        }
        let centroid = [0.5 * (simplex[0].0[0] + simplex[1].0[0]), 0.5 * (simplex[0].0[1] + simplex[1].0[1])];
        let worst = simplex[2];
        let along = |c: f64| bounds.clamp([centroid[0] + c * (centroid[0] - worst.0[0]), centroid[1] + c * (centroid[1] - worst.0[1])]);
        let xr = along(cfg.reflection);
        let fr = eval(xr, &mut evals);
        if fr > simplex[0].1 {
            let xe = along(cfg.reflection * cfg.expansion);
            let fe = eval(xe, &mut evals);
            simplex[2] = if fe > fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr > simplex[1].1 {
            simplex[2] = (xr, fr);
            continue;
        }
        let outside = fr > worst.1;
        let xc = if outside { along(cfg.reflection * cfg.contraction) } else { along(-cfg.contraction) };
        let fc = eval(xc, &mut evals);
        let accept = if outside { fc >= fr } else { fc > worst.1 };
        if accept {
            simplex[2] = (xc, fc);
            continue;
        }
        let best = simplex[0].0;
        for s in simplex.iter_mut().skip(1) {
            let x = bounds.clamp([best[0] + cfg.shrink * (s.0[0] - best[0]), best[1] + cfg.shrink * (s.0[1] - best[1])]);
            *s = (x, eval(x, &mut evals));
        }
    }
    simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
    simplex[0]
}
