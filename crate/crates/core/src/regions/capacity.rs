//! Point-to-point channel capacity by alternating maximization
//! (Blahut–Arimoto), stopped on the duality gap
//! `max_x D(q(·|x) ‖ q_Y) − I(p)`, which bounds `C − I(p)` from above.

use crate::prob::{Axis, CondKernel, JointPmf};

/// Target duality gap.
pub const TARGET_GAP: f64 = 1e-12;
/// Largest gap accepted as converged.
pub const ACCEPTED_GAP: f64 = 1e-9;
const MAX_ITERS: usize = 2_000_000;

/// Output of [`blahut_arimoto`].
#[derive(Clone, Debug, PartialEq)]
pub struct BaResult {
    /// `I(p)` at the returned input; within `gap` of capacity.
    pub capacity: f64,
    pub input: Vec<f64>,
    pub gap: f64,
    pub iterations: usize,
}

fn divergences(rows: &[f64], nx: usize, ny: usize, p: &[f64]) -> (Vec<f64>, f64) {
    let mut qy = vec![0.0; ny];
    for x in 0..nx {
        for y in 0..ny {
            qy[y] += p[x] * rows[x * ny + y];
        }
    }
    let d: Vec<f64> = (0..nx)
        .map(|x| {
            rows[x * ny..(x + 1) * ny]
                .iter()
                .zip(&qy)
                .filter(|(&a, _)| a > 0.0)
                .map(|(&a, &b)| a * (a / b).log2())
                .sum()
        })
        .collect();
    let i = p.iter().zip(&d).map(|(a, b)| a * b).sum();
    (d, i)
}

/// Capacity of the channel with row-major rows `q(y|x)`, `nx × ny`.
pub fn blahut_arimoto(rows: &[f64], nx: usize, ny: usize) -> BaResult {
    let mut p = vec![1.0 / nx as f64; nx];
    let mut iterations = 0;
    loop {
        let (d, i) = divergences(rows, nx, ny, &p);
        let gap = d.iter().copied().fold(f64::NEG_INFINITY, f64::max) - i;
        if gap <= TARGET_GAP || iterations >= MAX_ITERS {
            return BaResult { capacity: i, input: p, gap: gap.max(0.0), iterations };
        }
        let w: Vec<f64> = p.iter().zip(&d).map(|(a, b)| a * b.exp2()).collect();
        let s: f64 = w.iter().sum();
        p = w.into_iter().map(|v| v / s).collect();
        iterations += 1;
    }
}

/// Capacity `C = max_p I(X;Y)` of a kernel and an attaining input over the
/// kernel's `from` axes.
pub fn dmc_capacity(link: &CondKernel) -> (f64, JointPmf) {
    let r = blahut_arimoto(link.rows(), link.n_from(), link.n_to());
    let axes: Vec<Axis> = link.from_axes().to_vec();
    let p = JointPmf::normalized(
        crate::prob::Factor::new(axes, r.input).expect("kernel axes"),
    )
    .expect("positive mass");
    (r.capacity, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel(rows: Vec<f64>, nx: usize, ny: usize) -> CondKernel {
        CondKernel::new(vec![Axis::new("X", nx)], vec![Axis::new("Y", ny)], rows).unwrap()
    }

    #[test]
    fn closed_form_capacities() {
        let (c, p) = dmc_capacity(&kernel(vec![1.0, 0.0, 0.0, 1.0], 2, 2));
        assert!((c - 1.0).abs() < 1e-12);
        assert!((p.values()[0] - 0.5).abs() < 1e-12);
        let (c, _) = dmc_capacity(&kernel(vec![0.3, 0.7, 0.3, 0.7], 2, 2));
        assert!(c.abs() < 1e-12);
        let (c, _) = dmc_capacity(&kernel(vec![0.9, 0.1, 0.1, 0.9], 2, 2));
        assert!((c - 0.531_004_406_410_719).abs() < 1e-9);
        let (c, _) = dmc_capacity(&kernel(vec![0.5, 0.0, 0.5, 0.0, 0.5, 0.5], 2, 3));
        assert!((c - 0.5).abs() < 1e-9);
        let r = blahut_arimoto(&[1.0, 0.0, 0.5, 0.5], 2, 2);
        assert!((r.capacity - (5f64.log2() - 2.0)).abs() < 1e-9);
        assert!(r.gap <= ACCEPTED_GAP);
    }
}
