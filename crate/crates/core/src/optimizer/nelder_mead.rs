//! Nelder–Mead simplex minimizer on an unconstrained parameter vector.

/// Outcome of one local minimization.
#[derive(Debug, Clone)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    /// Stop once the spread of function values over the simplex drops below
    /// this value.
    pub tol: f64,
    pub max_iter: usize,
    /// Edge length of the axis-aligned starting simplex.
    pub initial_step: f64,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimizes `f` from `start`. After the simplex collapses it is rebuilt
/// once around the incumbent; convergence is declared only if the rebuilt
/// simplex fails to improve by more than `tol`.
pub fn minimize<F>(f: F, start: &[f64], options: Options) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let mut evaluations = 0;
    let mut iterations = 0;
    let mut point = start.to_vec();
    let mut value = f(&point);
    evaluations += 1;
    let mut step = options.initial_step;

    loop {
        let run = descend(&f, &point, step, options.tol, options.max_iter - iterations);
        iterations += run.iterations;
        evaluations += run.evaluations;
        let improvement = value - run.value;
        if run.value <= value {
            point = run.point;
            value = run.value;
        }
        if !run.converged {
            return Minimum {
                point,
                value,
                iterations,
                evaluations,
                converged: false,
            };
        }
        if improvement < options.tol {
            return Minimum {
                point,
                value,
                iterations,
                evaluations,
                converged: true,
            };
        }
        if iterations >= options.max_iter {
            return Minimum {
                point,
                value,
                iterations,
                evaluations,
                converged: false,
            };
        }
        step = (step * 0.1).max(1e-4);
    }
}

fn descend<F>(f: &F, start: &[f64], step: f64, tol: f64, budget: usize) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    let mut evaluations = n + 1;
    let mut iterations = 0;
    let mut order: Vec<usize> = (0..=n).collect();

    let converged = loop {
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];
        if values[worst] - values[best] < tol {
            break true;
        }
        if iterations >= budget {
            break false;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for &i in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                *c += x;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= n as f64);
        let toward = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let reflected = toward(REFLECT);
        let f_reflected = f(&reflected);
        evaluations += 1;

        if f_reflected < values[best] {
            let expanded = toward(REFLECT * EXPAND);
            let f_expanded = f(&expanded);
            evaluations += 1;
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }
        let (contracted, f_contracted) = if f_reflected < values[worst] {
            let p = toward(REFLECT * CONTRACT);
            let fp = f(&p);
            (p, fp)
        } else {
            let p = toward(-CONTRACT);
            let fp = f(&p);
            (p, fp)
        };
        evaluations += 1;
        if f_contracted < values[worst].min(f_reflected) {
            simplex[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }
        let anchor = simplex[best].clone();
        for i in 0..=n {
            if i == best {
                continue;
            }
            for (x, a) in simplex[i].iter_mut().zip(&anchor) {
                *x = a + SHRINK * (*x - a);
            }
            values[i] = f(&simplex[i]);
            evaluations += 1;
        }
    };

    let best = (0..=n)
        .min_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)))
        .expect("simplex is non-empty");
    Minimum {
        point: simplex[best].clone(),
        value: values[best],
        iterations,
        evaluations,
        converged,
    }
}
