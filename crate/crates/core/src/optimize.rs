//! Derivative-free minimizers: Nelder-Mead and Powell, with seeded restarts.
//!
//! The evaluation budget counts objective calls. Each restart gets a fresh
//! budget of `max_evals`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    NelderMead,
    Powell,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::NelderMead => "nelder-mead",
            Method::Powell => "powell",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nelder-mead" => Ok(Method::NelderMead),
            "powell" => Ok(Method::Powell),
            other => Err(Error::InvalidArgument(format!(
                "unknown optimizer `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub method: Method,
    pub max_evals: usize,
    pub x_tol: f64,
    pub f_tol: f64,
    /// Initial simplex edge (Nelder-Mead) or first bracketing step (Powell).
    pub scale: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Method::NelderMead,
            max_evals: 2000,
            x_tol: 1e-8,
            f_tol: 1e-12,
            scale: 0.5,
            restarts: 0,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_tol > 0.0 && self.f_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if self.max_evals == 0 {
            return Err(Error::InvalidArgument(
                "max_evals must be at least 1".into(),
            ));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidArgument("scale must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerTrace<T> {
    pub best_x: Vec<T>,
    pub best_f: T,
    pub evals_used: usize,
    /// Every objective value in call order, with its global call index.
    pub history: Vec<(usize, T)>,
    /// Whether the restart that produced `best_f` met the tolerances.
    pub converged: bool,
    pub best_restart: usize,
}

impl<T: Real> OptimizerTrace<T> {
    /// Running minimum of the history.
    pub fn running_min(&self) -> Vec<T> {
        let mut best = T::infinity();
        self.history
            .iter()
            .map(|&(_, f)| {
                best = best.min(f);
                best
            })
            .collect()
    }
}

/// Budgeted objective wrapper recording every call.
/// One optimizer run from a starting point.
type RunFn<T, F> = for<'a> fn(&mut Evaluator<'a, T, F>, Vec<T>, &OptimizerConfig) -> RunResult<T>;

struct Evaluator<'a, T, F> {
    f: &'a mut F,
    used: usize,
    budget: usize,
    offset: usize,
    history: &'a mut Vec<(usize, T)>,
}

impl<T: Real, F: FnMut(&[T]) -> T> Evaluator<'_, T, F> {
    fn eval(&mut self, x: &[T]) -> Option<T> {
        if self.used >= self.budget {
            return None;
        }
        let v = (self.f)(x);
        // NaN compares false everywhere; treat as +inf so orderings stay total.
        let v = if v.is_nan() { T::infinity() } else { v };
        self.history.push((self.offset + self.used, v));
        self.used += 1;
        Some(v)
    }
}

struct RunResult<T> {
    x: Vec<T>,
    f: T,
    converged: bool,
}

fn run_restarts<T: Real, F: FnMut(&[T]) -> T>(
    objective: &mut F,
    x0: &[T],
    config: &OptimizerConfig,
    run: RunFn<T, F>,
) -> OptimizerTrace<T> {
    assert!(!x0.is_empty(), "optimizer needs at least one dimension");
    config.validate().expect("invalid optimizer config");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let tau = 2.0 * std::f64::consts::PI;
    let mut history = Vec::new();
    let mut best: Option<(RunResult<T>, usize)> = None;
    let mut used = 0;
    for restart in 0..=config.restarts {
        let start: Vec<T> = if restart == 0 {
            x0.to_vec()
        } else {
            (0..x0.len())
                .map(|_| T::of(rng.gen::<f64>() * tau))
                .collect()
        };
        let mut ev = Evaluator {
            f: objective,
            used: 0,
            budget: config.max_evals,
            offset: used,
            history: &mut history,
        };
        let result = run(&mut ev, start, config);
        used += ev.used;
        if best.as_ref().is_none_or(|(b, _)| result.f < b.f) {
            best = Some((result, restart));
        }
    }
    let (result, best_restart) = best.expect("at least one run");
    OptimizerTrace {
        best_x: result.x,
        best_f: result.f,
        evals_used: used,
        history,
        converged: result.converged,
        best_restart,
    }
}

pub fn minimize_nelder_mead<T: Real, F: FnMut(&[T]) -> T>(
    mut objective: F,
    x0: &[T],
    config: &OptimizerConfig,
) -> OptimizerTrace<T> {
    run_restarts(&mut objective, x0, config, nelder_mead_run)
}

pub fn minimize_powell<T: Real, F: FnMut(&[T]) -> T>(
    mut objective: F,
    x0: &[T],
    config: &OptimizerConfig,
) -> OptimizerTrace<T> {
    run_restarts(&mut objective, x0, config, powell_run)
}

/// Dispatches on `config.method`.
pub fn minimize<T: Real, F: FnMut(&[T]) -> T>(
    objective: F,
    x0: &[T],
    config: &OptimizerConfig,
) -> OptimizerTrace<T> {
    match config.method {
        Method::NelderMead => minimize_nelder_mead(objective, x0, config),
        Method::Powell => minimize_powell(objective, x0, config),
    }
}

fn lerp<T: Real>(from: &[T], to: &[T], t: T) -> Vec<T> {
    from.iter()
        .zip(to)
        .map(|(&a, &b)| a + t * (b - a))
        .collect()
}

fn nelder_mead_run<T: Real, F: FnMut(&[T]) -> T>(
    ev: &mut Evaluator<'_, T, F>,
    x0: Vec<T>,
    config: &OptimizerConfig,
) -> RunResult<T> {
    let (alpha, gamma, rho, sigma) = (T::one(), T::of(2.0), T::of(0.5), T::of(0.5));
    let d = x0.len();
    let mut simplex = vec![x0.clone()];
    for i in 0..d {
        let mut v = x0.clone();
        v[i] += T::of(config.scale);
        simplex.push(v);
    }
    let mut values = Vec::with_capacity(d + 1);
    for v in &simplex {
        match ev.eval(v) {
            Some(f) => values.push(f),
            None => break,
        }
    }
    if values.len() < simplex.len() {
        simplex.truncate(values.len().max(1));
        if values.is_empty() {
            return RunResult {
                x: x0,
                f: T::infinity(),
                converged: false,
            };
        }
        let (i, _) = argmin(&values);
        return RunResult {
            x: simplex[i].clone(),
            f: values[i],
            converged: false,
        };
    }

    let (x_tol, f_tol) = (T::of(config.x_tol), T::of(config.f_tol));
    let mut converged = false;
    loop {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("no NaN"));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let diameter = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(&a, &b)| (a - b).abs()))
            .fold(T::zero(), T::max);
        let spread = values[d] - values[0];
        if diameter <= x_tol && spread <= f_tol {
            converged = true;
            break;
        }

        let centroid: Vec<T> = (0..d)
            .map(|j| simplex[..d].iter().map(|v| v[j]).sum::<T>() / T::of_usize(d))
            .collect();
        let worst = simplex[d].clone();
        let xr = lerp(&centroid, &worst, -alpha);
        let Some(fr) = ev.eval(&xr) else { break };

        if fr < values[0] {
            let xe = lerp(&centroid, &xr, gamma);
            let Some(fe) = ev.eval(&xe) else {
                simplex[d] = xr;
                values[d] = fr;
                break;
            };
            if fe < fr {
                simplex[d] = xe;
                values[d] = fe;
            } else {
                simplex[d] = xr;
                values[d] = fr;
            }
            continue;
        }
        if fr < values[d - 1] {
            simplex[d] = xr;
            values[d] = fr;
            continue;
        }
        let (xc, accept_below) = if fr < values[d] {
            (lerp(&centroid, &xr, rho), fr)
        } else {
            (lerp(&centroid, &worst, rho), values[d])
        };
        let Some(fc) = ev.eval(&xc) else { break };
        let accepted = if fr < values[d] {
            fc <= accept_below
        } else {
            fc < accept_below
        };
        if accepted {
            simplex[d] = xc;
            values[d] = fc;
            continue;
        }
        let mut exhausted = false;
        for i in 1..=d {
            simplex[i] = lerp(&simplex[0], &simplex[i], sigma);
            match ev.eval(&simplex[i]) {
                Some(f) => values[i] = f,
                None => {
                    // Unevaluated vertex; keep the ordering honest.
                    values[i] = T::infinity();
                    exhausted = true;
                    break;
                }
            }
        }
        if exhausted {
            break;
        }
    }
    let (i, _) = argmin(&values);
    RunResult {
        x: simplex[i].clone(),
        f: values[i],
        converged,
    }
}

fn argmin<T: Real>(values: &[T]) -> (usize, T) {
    values.iter().enumerate().fold(
        (0, T::infinity()),
        |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) },
    )
}

fn axpy<T: Real>(x: &[T], t: T, dir: &[T]) -> Vec<T> {
    x.iter().zip(dir).map(|(&a, &d)| a + t * d).collect()
}

/// Minimizes `phi(t) = f(x + t dir)` by bracketing from steps `0, step` and
/// Brent's method. Returns `(t, phi(t))`, or `None` when the budget runs out
/// (the best point seen is returned through `best`).
fn line_search<T: Real, F: FnMut(&[T]) -> T>(
    ev: &mut Evaluator<'_, T, F>,
    x: &[T],
    fx: T,
    dir: &[T],
    step: T,
    tol: T,
    best: &mut (T, T),
) -> Option<()> {
    let mut phi = |t: T, best: &mut (T, T)| -> Option<T> {
        let v = ev.eval(&axpy(x, t, dir))?;
        if v < best.1 {
            *best = (t, v);
        }
        Some(v)
    };
    *best = (T::zero(), fx);
    let golden = T::of(1.618_033_988_749_895);
    let (mut a, mut fa) = (T::zero(), fx);
    let (mut b, mut fb) = (step, phi(step, best)?);
    if fb > fa {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = b + golden * (b - a);
    let mut fc = phi(c, best)?;
    let mut grow = 0;
    while fb > fc {
        a = b;
        fa = fb;
        b = c;
        fb = fc;
        c = b + golden * (b - a);
        fc = phi(c, best)?;
        grow += 1;
        if grow > 60 {
            return Some(());
        }
    }
    // If fb == fa == fc the function is flat along this line; keep best.
    if fb >= fa && fb >= fc {
        return Some(());
    }
    let _ = fa;
    let (lo, hi) = if a < c { (a, c) } else { (c, a) };
    brent(&mut phi, best, lo, hi, b, fb, tol)
}

fn brent<T: Real>(
    phi: &mut impl FnMut(T, &mut (T, T)) -> Option<T>,
    best: &mut (T, T),
    mut lo: T,
    mut hi: T,
    b: T,
    fb: T,
    tol: T,
) -> Option<()> {
    let cgold = T::of(0.381_966_011_250_105_1);
    let zeps = T::of(1e-11);
    let (mut x, mut w, mut v) = (b, b, b);
    let (mut fx, mut fw, mut fv) = (fb, fb, fb);
    let mut d = T::zero();
    let mut e = T::zero();
    let two = T::of(2.0);
    let half = T::of(0.5);
    for _ in 0..200 {
        let xm = half * (lo + hi);
        let tol1 = tol * x.abs() + zeps;
        let tol2 = two * tol1;
        if (x - xm).abs() <= tol2 - half * (hi - lo) {
            return Some(());
        }
        let mut golden_step = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = two * (q - r);
            if q > T::zero() {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if !(p.abs() >= (half * q * etemp).abs() || p <= q * (lo - x) || p >= q * (hi - x)) {
                d = p / q;
                let u = x + d;
                if u - lo < tol2 || hi - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden_step = false;
            }
        }
        if golden_step {
            e = if x >= xm { lo - x } else { hi - x };
            d = cgold * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d >= T::zero() {
            x + tol1
        } else {
            x - tol1
        };
        let fu = phi(u, best)?;
        if fu <= fx {
            if u >= x {
                lo = x;
            } else {
                hi = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                lo = u;
            } else {
                hi = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Some(())
}

fn powell_run<T: Real, F: FnMut(&[T]) -> T>(
    ev: &mut Evaluator<'_, T, F>,
    x0: Vec<T>,
    config: &OptimizerConfig,
) -> RunResult<T> {
    let d = x0.len();
    let Some(f0) = ev.eval(&x0) else {
        return RunResult {
            x: x0,
            f: T::infinity(),
            converged: false,
        };
    };
    let mut x = x0;
    let mut fx = f0;
    let mut dirs: Vec<Vec<T>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect();
    let step = T::of(config.scale);
    let line_tol = T::epsilon().sqrt();
    let (x_tol, f_tol) = (T::of(config.x_tol), T::of(config.f_tol));
    let mut converged = false;

    'outer: loop {
        let x_start = x.clone();
        let f_start = fx;
        let mut big = 0;
        let mut big_drop = T::zero();
        for (i, dir) in dirs.iter().enumerate() {
            let mut best = (T::zero(), fx);
            let done = line_search(ev, &x, fx, dir, step, line_tol, &mut best);
            let drop = fx - best.1;
            x = axpy(&x, best.0, dir);
            fx = best.1;
            if drop > big_drop {
                big_drop = drop;
                big = i;
            }
            if done.is_none() {
                break 'outer;
            }
        }
        let moved = x
            .iter()
            .zip(&x_start)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max);
        if f_start - fx <= f_tol && moved <= x_tol {
            converged = true;
            break;
        }
        let new_dir: Vec<T> = x.iter().zip(&x_start).map(|(&a, &b)| a - b).collect();
        if moved == T::zero() {
            continue;
        }
        let extrapolated = axpy(&x, T::one(), &new_dir);
        let Some(fe) = ev.eval(&extrapolated) else {
            break;
        };
        if fe < fx {
            let x_best = extrapolated;
            let f_best = fe;
            // Keep the extrapolated point if it improved.
            let two = T::of(2.0);
            let t = two * (f_start - two * fx + fe) * (f_start - fx - big_drop).powi(2)
                - big_drop * (f_start - fe).powi(2);
            x = x_best;
            fx = f_best;
            if t < T::zero() {
                let mut best = (T::zero(), fx);
                let done = line_search(ev, &x, fx, &new_dir, step, line_tol, &mut best);
                x = axpy(&x, best.0, &new_dir);
                fx = best.1;
                dirs[big] = dirs[d - 1].clone();
                dirs[d - 1] = new_dir;
                if done.is_none() {
                    break;
                }
            }
        }
    }
    RunResult {
        x,
        f: fx,
        converged,
    }
}
