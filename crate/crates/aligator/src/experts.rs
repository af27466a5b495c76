//! Local predictors attached to intervals of the geometric cover.
//!
//! A running-average expert predicts the mean of the observations routed to
//! it (0 before it has seen anything) and extrapolates as a constant. A
//! polynomial expert maintains the normal equations of a ridge least-squares
//! fit of degree `d` in the time coordinate and evaluates the fit, so it can
//! extrapolate trends past its interval. Both are cheap single-writer state
//! machines updated by rank-one accumulation.
//!
//! The polynomial basis is centered at the interval start and scaled by the
//! interval length, so the design coordinate lives in [0, 1] regardless of
//! where the interval sits; the ridge term acts on that scaled basis. Until a
//! polynomial expert has seen `d + 1` points it falls back to the running
//! mean of what it has, and its evaluations are clipped to a caller-supplied
//! bound so that a near-degenerate fit cannot emit wild values.

use crate::{Error, Result};

/// Running mean of the observations routed to one interval.
#[derive(Debug, Clone, Default)]
pub struct RunningAverageExpert {
    sum: f64,
    count: u64,
}

impl RunningAverageExpert {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn predict(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }

    pub fn observe(&mut self, y: f64) -> Result<()> {
        if !y.is_finite() {
            return Err(Error::Domain(format!("non-finite observation {y}")));
        }
        self.sum += y;
        self.count += 1;
        Ok(())
    }
}

/// Online ridge polynomial fit over one interval.
#[derive(Debug, Clone)]
pub struct PolynomialExpert {
    degree: usize,
    /// Accumulated basis outer products, row-major (d+1) x (d+1).
    moment_matrix: Vec<f64>,
    /// Accumulated basis * y.
    moment_vector: Vec<f64>,
    ridge: f64,
    count: u64,
    sum: f64,
    interval_start: u64,
    interval_len: u64,
}

pub const DEFAULT_RIDGE: f64 = 1e-8;

impl PolynomialExpert {
    pub fn new(degree: usize, interval_start: u64, interval_len: u64, ridge: f64) -> Self {
        let dim = degree + 1;
        PolynomialExpert {
            degree,
            moment_matrix: vec![0.0; dim * dim],
            moment_vector: vec![0.0; dim],
            ridge,
            count: 0,
            sum: 0.0,
            interval_start,
            interval_len: interval_len.max(1),
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    fn coordinate(&self, t: u64) -> f64 {
        (t as f64 - self.interval_start as f64) / self.interval_len as f64
    }

    fn basis(&self, u: f64) -> Vec<f64> {
        let mut phi = Vec::with_capacity(self.degree + 1);
        let mut p = 1.0;
        for _ in 0..=self.degree {
            phi.push(p);
            p *= u;
        }
        phi
    }

    pub fn observe(&mut self, t: u64, y: f64) -> Result<()> {
        if !y.is_finite() {
            return Err(Error::Domain(format!("non-finite observation {y}")));
        }
        let phi = self.basis(self.coordinate(t));
        let dim = self.degree + 1;
        for r in 0..dim {
            for c in 0..dim {
                self.moment_matrix[r * dim + c] += phi[r] * phi[c];
            }
            self.moment_vector[r] += phi[r] * y;
        }
        self.sum += y;
        self.count += 1;
        Ok(())
    }

    /// Evaluates the current fit at `t`, clipped to `[-clip, clip]`.
    ///
    /// `t` may lie outside the interval; this is what extrapolation uses.
    pub fn evaluate(&self, t: u64, clip: f64) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        // Degenerate fit: fewer points than coefficients degrades to the mean.
        let value = if self.count < (self.degree + 1) as u64 {
            self.sum / self.count as f64
        } else {
            let beta = self.solve();
            let phi = self.basis(self.coordinate(t));
            beta.iter().zip(&phi).map(|(b, p)| b * p).sum()
        };
        value.clamp(-clip, clip)
    }

    /// Solves `(moment_matrix + ridge I) beta = moment_vector` by Cholesky.
    fn solve(&self) -> Vec<f64> {
        let dim = self.degree + 1;
        let mut a = self.moment_matrix.clone();
        for i in 0..dim {
            a[i * dim + i] += self.ridge;
        }
        // In-place lower Cholesky; the matrix is positive definite by the
        // ridge term.
        let mut l = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let mut s = a[i * dim + j];
                for k in 0..j {
                    s -= l[i * dim + k] * l[j * dim + k];
                }
                if i == j {
                    l[i * dim + i] = s.max(1e-300).sqrt();
                } else {
                    l[i * dim + j] = s / l[j * dim + j];
                }
            }
        }
        // Forward then back substitution.
        let mut z = vec![0.0; dim];
        for i in 0..dim {
            let mut s = self.moment_vector[i];
            for k in 0..i {
                s -= l[i * dim + k] * z[k];
            }
            z[i] = s / l[i * dim + i];
        }
        let mut beta = vec![0.0; dim];
        for i in (0..dim).rev() {
            let mut s = z[i];
            for k in (i + 1)..dim {
                s -= l[k * dim + i] * beta[k];
            }
            beta[i] = s / l[i * dim + i];
        }
        beta
    }
}

/// Either kind of local predictor, as stored in the expert bank.
#[derive(Debug, Clone)]
pub enum Expert {
    RunningAverage(RunningAverageExpert),
    Polynomial(PolynomialExpert),
}

impl Expert {
    pub fn count(&self) -> u64 {
        match self {
            Expert::RunningAverage(e) => e.count(),
            Expert::Polynomial(e) => e.count(),
        }
    }

    /// Prediction at a queried time inside the expert's interval.
    pub fn predict(&self, t: u64, clip: f64) -> f64 {
        match self {
            Expert::RunningAverage(e) => e.predict(),
            Expert::Polynomial(e) => e.evaluate(t, clip),
        }
    }

    /// Forecast at a time that may lie beyond the expert's interval: the
    /// running average extrapolates as a constant, the polynomial evaluates
    /// its fitted curve there.
    pub fn extrapolate(&self, t_future: u64, clip: f64) -> f64 {
        match self {
            Expert::RunningAverage(e) => e.predict(),
            Expert::Polynomial(e) => e.evaluate(t_future, clip),
        }
    }

    pub fn observe(&mut self, t: u64, y: f64) -> Result<()> {
        match self {
            Expert::RunningAverage(e) => e.observe(y),
            Expert::Polynomial(e) => e.observe(t, y),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng64;

    const NO_CLIP: f64 = f64::INFINITY;

    /// Dense ridge oracle: rebuilds the design matrix from the full stream
    /// and solves the normal equations by Gaussian elimination with partial
    /// pivoting. Entirely independent of the incremental path.
    #[allow(clippy::needless_range_loop)]
    fn dense_ridge_fit(
        points: &[(u64, f64)],
        degree: usize,
        start: u64,
        len: u64,
        ridge: f64,
        t_eval: u64,
    ) -> f64 {
        let dim = degree + 1;
        let coord = |t: u64| (t as f64 - start as f64) / len as f64;
        let mut a = vec![vec![0.0f64; dim]; dim];
        let mut b = vec![0.0f64; dim];
        for &(t, y) in points {
            let u = coord(t);
            let phi: Vec<f64> = (0..dim).map(|p| u.powi(p as i32)).collect();
            for r in 0..dim {
                for c in 0..dim {
                    a[r][c] += phi[r] * phi[c];
                }
                b[r] += phi[r] * y;
            }
        }
        for i in 0..dim {
            a[i][i] += ridge;
        }
        // Gaussian elimination with partial pivoting.
        for col in 0..dim {
            let pivot = (col..dim)
                .max_by(|&r1, &r2| a[r1][col].abs().partial_cmp(&a[r2][col].abs()).unwrap())
                .unwrap();
            a.swap(col, pivot);
            b.swap(col, pivot);
            for row in (col + 1)..dim {
                let f = a[row][col] / a[col][col];
                for c in col..dim {
                    a[row][c] -= f * a[col][c];
                }
                b[row] -= f * b[col];
            }
        }
        let mut beta = vec![0.0; dim];
        for i in (0..dim).rev() {
            let mut s = b[i];
            for c in (i + 1)..dim {
                s -= a[i][c] * beta[c];
            }
            beta[i] = s / a[i][i];
        }
        let u = coord(t_eval);
        (0..dim).map(|p| beta[p] * u.powi(p as i32)).sum()
    }

    #[test]
    fn running_average_basics() {
        let mut e = RunningAverageExpert::new();
        assert_eq!(e.predict(), 0.0);
        e.observe(1.0).unwrap();
        assert_eq!(e.predict(), 1.0);
        e.observe(3.0).unwrap();
        assert_eq!(e.predict(), 2.0);
        assert!(e.observe(f64::NAN).is_err());

        let mut e = RunningAverageExpert::new();
        e.observe(2.0).unwrap();
        e.observe(2.0).unwrap();
        assert_eq!(e.sum(), 4.0);
        assert_eq!(e.count(), 2);
    }

    #[test]
    fn running_average_matches_batch_mean() {
        let mut rng = Rng64::new(9);
        let mut e = RunningAverageExpert::new();
        let mut values = Vec::new();
        for _ in 0..100_000 {
            let y = rng.next_range(-5.0, 5.0);
            values.push(y);
            e.observe(y).unwrap();
        }
        let batch = values.iter().sum::<f64>() / values.len() as f64;
        assert!((e.predict() - batch).abs() <= 1e-12 * batch.abs().max(1.0));
    }

    #[test]
    fn polynomial_line_fit_and_extrapolation() {
        let mut e = PolynomialExpert::new(1, 1, 4, 1e-8);
        e.observe(1, 1.0).unwrap();
        e.observe(2, 2.0).unwrap();
        let got = e.evaluate(3, NO_CLIP);
        assert!((got - 3.0).abs() < 1e-6, "got {got}");
        let oracle = dense_ridge_fit(&[(1, 1.0), (2, 2.0)], 1, 1, 4, 1e-8, 3);
        assert!((got - oracle).abs() < 1e-10);

        // Far extrapolation follows the line, then the clip bound.
        let far = e.evaluate(16, NO_CLIP);
        assert!((far - 16.0).abs() < 1e-5, "far {far}");
        assert_eq!(e.evaluate(16, 10.0), 10.0);
    }

    #[test]
    fn polynomial_degenerate_counts_fall_back_to_mean() {
        let mut e = PolynomialExpert::new(3, 1, 8, 1e-8);
        assert_eq!(e.evaluate(5, NO_CLIP), 0.0);
        e.observe(2, 4.0).unwrap();
        assert_eq!(e.evaluate(7, NO_CLIP), 4.0);
        e.observe(3, 6.0).unwrap();
        assert_eq!(e.evaluate(1, NO_CLIP), 5.0);
    }

    #[test]
    fn polynomial_constant_stream_is_exact() {
        let mut e = PolynomialExpert::new(1, 8, 8, 1e-8);
        for t in 8..=15 {
            e.observe(t, 2.5).unwrap();
        }
        for t in 8..=15 {
            assert!((e.evaluate(t, NO_CLIP) - 2.5).abs() < 1e-7);
        }
    }

    #[test]
    fn polynomial_degree_zero_matches_running_average() {
        let mut rng = Rng64::new(21);
        let mut poly = PolynomialExpert::new(0, 4, 4, 1e-10);
        let mut avg = RunningAverageExpert::new();
        for step in 0..500 {
            let t = 4 + rng.next_below(4);
            let y = rng.next_range(-2.0, 2.0);
            poly.observe(t, y).unwrap();
            avg.observe(y).unwrap();
            if step > 0 {
                let d = (poly.evaluate(t, NO_CLIP) - avg.predict()).abs();
                assert!(d < 1e-6, "diff {d} at step {step}");
            }
        }
    }

    #[test]
    fn polynomial_matches_dense_oracle() {
        for degree in 0..=3 {
            let mut rng = Rng64::new(100 + degree as u64);
            let (start, len) = (16u64, 16u64);
            let mut e = PolynomialExpert::new(degree, start, len, 1e-8);
            let mut points = Vec::new();
            for _ in 0..1000 {
                let t = start + rng.next_below(len);
                let y = rng.next_range(-3.0, 3.0);
                e.observe(t, y).unwrap();
                points.push((t, y));
            }
            for t in start..start + len {
                let got = e.evaluate(t, NO_CLIP);
                let want = dense_ridge_fit(&points, degree, start, len, 1e-8, t);
                let denom = want.abs().max(1.0);
                assert!(
                    ((got - want) / denom).abs() < 1e-8,
                    "degree {degree} t {t}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn expert_enum_dispatch() {
        let mut e = Expert::RunningAverage(RunningAverageExpert::new());
        assert_eq!(e.extrapolate(1000, NO_CLIP), 0.0);
        e.observe(5, 2.5).unwrap();
        assert_eq!(e.extrapolate(1000, NO_CLIP), 2.5);
        assert_eq!(e.predict(5, NO_CLIP), 2.5);

        let fresh = Expert::Polynomial(PolynomialExpert::new(2, 1, 8, 1e-8));
        assert_eq!(fresh.extrapolate(50, NO_CLIP), 0.0);
    }

    #[test]
    fn online_average_static_regret_is_logarithmic() {
        // Cumulative squared loss of the running mean minus the best fixed
        // constant in hindsight grows like nu^2 log T.
        let mut rng = Rng64::new(77);
        for &t_max in &[100usize, 1000, 10_000] {
            let nu = 2.0;
            let ys: Vec<f64> = (0..t_max).map(|_| rng.next_range(-nu, nu)).collect();
            let mut e = RunningAverageExpert::new();
            let mut online_loss = 0.0;
            for &y in &ys {
                let p = e.predict();
                online_loss += (y - p) * (y - p);
                e.observe(y).unwrap();
            }
            let mean = ys.iter().sum::<f64>() / t_max as f64;
            let best_fixed: f64 = ys.iter().map(|y| (y - mean) * (y - mean)).sum();
            let regret = online_loss - best_fixed;
            let budget = 8.0 * nu * nu * (1.0 + (t_max as f64).ln());
            assert!(
                regret <= budget,
                "T {t_max}: regret {regret} over budget {budget}"
            );
        }
    }
}
