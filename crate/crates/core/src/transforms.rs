//! Unitary transform kernels.
//!
//! The DAFT pair is evaluated as chirp multiply, FFT, chirp multiply, which
//! is exact and O(N log N). DFT lengths are arbitrary; `rustfft` picks a
//! Bluestein or Rader plan for sizes that are not highly composite.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, Error, Result};

/// Chirp rates and size of a discrete affine Fourier transform.
///
/// `c1` is the post-chirp (time-side) rate and `c2` the pre-chirp
/// (affine-side) rate. With both zero the pair reduces to the unitary DFT.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpParams {
    pub c1: f64,
    pub c2: f64,
    pub n_points: usize,
}

impl ChirpParams {
    pub fn new(c1: f64, c2: f64, n_points: usize) -> Result<Self> {
        if n_points == 0 {
            return Err(Error::Argument("transform size must be positive".into()));
        }
        if !c1.is_finite() || !c2.is_finite() {
            return Err(Error::Argument("chirp rates must be finite".into()));
        }
        Ok(Self { c1, c2, n_points })
    }

    /// Plain DFT pair of size `n_points`.
    pub fn dft(n_points: usize) -> Result<Self> {
        Self::new(0.0, 0.0, n_points)
    }
}

/// `exp(sign * j2π * rate * n²)` with the phase reduced modulo one turn
/// before scaling, so large `n` keeps full precision.
pub fn chirp(rate: f64, n: i64, sign: f64) -> Complex64 {
    let nn = (n as f64) * (n as f64);
    let turns = (rate * nn).rem_euclid(1.0);
    Complex64::from_polar(1.0, sign * 2.0 * PI * turns)
}

/// `exp(j2π * turns)` with the argument reduced first.
pub fn unit_phase(turns: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * turns.rem_euclid(1.0))
}

/// Planned unitary DFT of a fixed length (1/√N scaling both ways).
#[derive(Clone)]
pub struct UnitaryDft {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for UnitaryDft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UnitaryDft").field("len", &self.len).finish()
    }
}

impl UnitaryDft {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Argument("DFT length must be positive".into()));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            scale: 1.0 / (len as f64).sqrt(),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) -> Result<()> {
        check_len(self.len, buf.len())?;
        self.forward.process(buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
        Ok(())
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) -> Result<()> {
        check_len(self.len, buf.len())?;
        self.inverse.process(buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
        Ok(())
    }
}

/// Planned DAFT/IDAFT pair with precomputed chirp tables.
#[derive(Debug, Clone)]
pub struct AffineTransform {
    params: ChirpParams,
    dft: UnitaryDft,
    // exp(+j2π c1 n²) and exp(+j2π c2 m²)
    post: Vec<Complex64>,
    pre: Vec<Complex64>,
}

impl AffineTransform {
    pub fn new(params: ChirpParams) -> Result<Self> {
        let n = params.n_points;
        let dft = UnitaryDft::new(n)?;
        let post = (0..n).map(|i| chirp(params.c1, i as i64, 1.0)).collect();
        let pre = (0..n).map(|i| chirp(params.c2, i as i64, 1.0)).collect();
        Ok(Self {
            params,
            dft,
            post,
            pre,
        })
    }

    pub fn params(&self) -> ChirpParams {
        self.params
    }

    /// Affine domain to time domain.
    pub fn idaft_in_place(&self, buf: &mut [Complex64]) -> Result<()> {
        check_len(self.params.n_points, buf.len())?;
        buf.iter_mut().zip(&self.pre).for_each(|(v, c)| *v *= c);
        self.dft.inverse_in_place(buf)?;
        buf.iter_mut().zip(&self.post).for_each(|(v, c)| *v *= c);
        Ok(())
    }

    /// Time domain to affine domain.
    pub fn daft_in_place(&self, buf: &mut [Complex64]) -> Result<()> {
        check_len(self.params.n_points, buf.len())?;
        buf.iter_mut().zip(&self.post).for_each(|(v, c)| *v *= c.conj());
        self.dft.forward_in_place(buf)?;
        buf.iter_mut().zip(&self.pre).for_each(|(v, c)| *v *= c.conj());
        Ok(())
    }
}

/// IDAFT: s[n] = N^{-1/2} Σ_m x[m] exp(j2π(c1 n² + c2 m² + mn/N)).
pub fn idaft(x: &[Complex64], p: &ChirpParams) -> Result<Vec<Complex64>> {
    check_len(p.n_points, x.len())?;
    let t = AffineTransform::new(*p)?;
    let mut out = x.to_vec();
    t.idaft_in_place(&mut out)?;
    Ok(out)
}

/// DAFT, the inverse of [`idaft`] for the same parameters.
pub fn daft(r: &[Complex64], p: &ChirpParams) -> Result<Vec<Complex64>> {
    check_len(p.n_points, r.len())?;
    let t = AffineTransform::new(*p)?;
    let mut out = r.to_vec();
    t.daft_in_place(&mut out)?;
    Ok(out)
}

/// Unitary DFT of any nonzero length.
pub fn dft(v: &[Complex64]) -> Result<Vec<Complex64>> {
    let plan = UnitaryDft::new(v.len())?;
    let mut out = v.to_vec();
    plan.forward_in_place(&mut out)?;
    Ok(out)
}

/// Unitary inverse DFT of any nonzero length.
pub fn idft(v: &[Complex64]) -> Result<Vec<Complex64>> {
    let plan = UnitaryDft::new(v.len())?;
    let mut out = v.to_vec();
    plan.inverse_in_place(&mut out)?;
    Ok(out)
}

/// Sinc-like leakage kernel
/// κ(φ) = (1/n_d) Σ_{m=l̂}^{n_d+l̂-1} exp(j2π m φ / n_d), in closed form.
pub fn kappa(n_d: usize, l_hat: i64, phi: f64) -> Complex64 {
    assert!(n_d >= 1, "kappa needs n_d >= 1");
    let nd = n_d as f64;
    // exp(j2π l̂ φ / n_d) with the product reduced before scaling
    let offset = unit_phase(l_hat as f64 * phi / nd);
    let denom = (PI * phi / nd).sin();
    if denom.abs() < 1e-12 {
        // φ is a multiple of n_d: every term equals the first one
        return offset;
    }
    let magnitude = (PI * phi).sin() / (nd * denom);
    offset * Complex64::from_polar(magnitude, PI * phi * (nd - 1.0) / nd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect()
    }

    fn norm(v: &[Complex64]) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    // O(N²) direct summation, written independently of the FFT path.
    fn idaft_direct(x: &[Complex64], c1: f64, c2: f64) -> Vec<Complex64> {
        let n = x.len();
        let nf = n as f64;
        (0..n)
            .map(|t| {
                let tf = t as f64;
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (m, &xm)| {
                    let mf = m as f64;
                    let arg = 2.0 * PI * (c1 * tf * tf + c2 * mf * mf + mf * tf / nf);
                    acc + xm * Complex64::from_polar(1.0, arg)
                }) / nf.sqrt()
            })
            .collect()
    }

    fn dft_direct(v: &[Complex64]) -> Vec<Complex64> {
        let n = v.len() as f64;
        (0..v.len())
            .map(|k| {
                v.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (m, &x)| {
                    acc + x * Complex64::from_polar(1.0, -2.0 * PI * (m * k) as f64 / n)
                }) / n.sqrt()
            })
            .collect()
    }

    fn kappa_direct(n_d: usize, l_hat: i64, phi: f64) -> Complex64 {
        let nd = n_d as f64;
        (l_hat..l_hat + n_d as i64)
            .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 * phi / nd))
            .sum::<Complex64>()
            / nd
    }

    #[test]
    fn idaft_of_size_one_is_identity() {
        let p = ChirpParams::new(0.37, 1.9, 1).unwrap();
        let s = idaft(&[Complex64::new(1.0, 0.0)], &p).unwrap();
        assert!((s[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn idaft_without_chirps_spreads_impulse() {
        let p = ChirpParams::dft(4).unwrap();
        let mut x = vec![Complex64::new(0.0, 0.0); 4];
        x[0] = Complex64::new(1.0, 0.0);
        let s = idaft(&x, &p).unwrap();
        for v in s {
            assert!((v - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn idaft_matches_direct_summation_and_round_trips() {
        let c1 = 5.0 / 16.0;
        let c2 = 1.0 / (4.0 * c1 * 64.0);
        let p = ChirpParams::new(c1, c2, 8).unwrap();
        let x = random_vec(8, 11);
        let s = idaft(&x, &p).unwrap();
        assert!(max_diff(&s, &idaft_direct(&x, c1, c2)) < 1e-12);
        let back = daft(&s, &p).unwrap();
        assert!(max_diff(&back, &x) < 1e-12);
    }

    #[test]
    fn daft_round_trip_and_unitarity() {
        let p = ChirpParams::new(0.123, 0.0457, 16).unwrap();
        let x = random_vec(16, 3);
        let back = daft(&idaft(&x, &p).unwrap(), &p).unwrap();
        assert!(max_diff(&back, &x) < 1e-12);

        let ones = vec![Complex64::new(1.0, 0.0); 8];
        let p8 = ChirpParams::new(0.2, 0.3, 8).unwrap();
        let y = daft(&ones, &p8).unwrap();
        assert!((norm(&y) - 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn daft_without_chirps_equals_dft() {
        let x = random_vec(12, 5);
        let p = ChirpParams::dft(12).unwrap();
        assert!(max_diff(&daft(&x, &p).unwrap(), &dft(&x).unwrap()) < 1e-14);
    }

    #[test]
    fn unitarity_and_inverse_over_sizes() {
        for (i, &n) in [1usize, 2, 7, 64, 413].iter().enumerate() {
            let p = ChirpParams::new(0.61 / n as f64, 0.17, n).unwrap();
            let x = random_vec(n, 100 + i as u64);
            let s = idaft(&x, &p).unwrap();
            let y = daft(&x, &p).unwrap();
            let nx = norm(&x);
            assert!((norm(&s) - nx).abs() / nx < 1e-12, "idaft norm, n={n}");
            assert!((norm(&y) - nx).abs() / nx < 1e-12, "daft norm, n={n}");
            assert!(max_diff(&daft(&s, &p).unwrap(), &x) < 1e-12);
            assert!(max_diff(&idaft(&y, &p).unwrap(), &x) < 1e-12);
        }
    }

    #[test]
    fn dft_examples() {
        let mut imp = vec![Complex64::new(0.0, 0.0); 4];
        imp[0] = Complex64::new(1.0, 0.0);
        for v in dft(&imp).unwrap() {
            assert!((v - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
        let c = dft(&[Complex64::new(1.0, 0.0); 4]).unwrap();
        let expect = [2.0, 0.0, 0.0, 0.0];
        for (v, e) in c.iter().zip(expect) {
            assert!((v - Complex64::new(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn dft_arbitrary_length_against_direct() {
        let v = random_vec(413, 9);
        let f = dft(&v).unwrap();
        assert!(max_diff(&f, &dft_direct(&v)) < 1e-12);
        assert!(max_diff(&idft(&f).unwrap(), &v) < 1e-12);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(dft(&[]).is_err());
        assert!(ChirpParams::new(0.1, 0.1, 0).is_err());
        let p = ChirpParams::dft(4).unwrap();
        assert!(matches!(
            idaft(&[Complex64::new(1.0, 0.0); 3], &p),
            Err(Error::Dimension { expected: 4, actual: 3 })
        ));
    }

    #[test]
    fn kappa_examples() {
        for nd in [1usize, 5, 64] {
            for l in [-3i64, 0, 7] {
                assert_eq!(kappa(nd, l, 0.0), Complex64::new(1.0, 0.0));
            }
        }
        assert!(kappa(4, 0, 2.0).norm() < 1e-15);
        let direct = kappa_direct(16, 3, 0.25);
        assert!((kappa(16, 3, 0.25) - direct).norm() < 1e-14);
    }

    #[test]
    fn kappa_limit_branch_at_period() {
        // φ = n_d gives every term exp(j2π m) = 1
        let v = kappa(8, 5, 8.0);
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((kappa(8, 5, 16.0) - kappa_direct(8, 5, 16.0)).norm() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn kappa_matches_direct(nd in 1usize..40, l in -50i64..50, phi in -30.0f64..30.0) {
                let d = kappa_direct(nd, l, phi);
                prop_assert!((kappa(nd, l, phi) - d).norm() < 1e-9);
                prop_assert!(kappa(nd, l, phi).norm() <= 1.0 + 1e-12);
            }

            #[test]
            fn kappa_parseval(nd in 1usize..80, l in -100i64..100, eps in -0.49f64..0.49) {
                let total: f64 = (0..nd).map(|q| kappa(nd, l, q as f64 - eps).norm_sqr()).sum();
                prop_assert!((total - 1.0).abs() < 1e-10);
            }

            #[test]
            fn kappa_peak_at_nearest_grid_point(nd in 2usize..64, l in -20i64..20, eps in -0.49f64..0.49) {
                // offsets q - eps over q in (-nd/2, nd/2]; the peak is at q = 0
                let lo = -((nd as i64 - 1) / 2);
                let hi = nd as i64 / 2;
                let peak = kappa(nd, l, -eps).norm();
                for q in lo..=hi {
                    prop_assert!(kappa(nd, l, q as f64 - eps).norm() <= peak + 1e-12);
                }
            }

            #[test]
            fn daft_is_inverse_of_idaft(n in 1usize..48, c1 in 0.0f64..1.0, c2 in 0.0f64..1.0, seed in 0u64..1000) {
                let p = ChirpParams::new(c1, c2, n).unwrap();
                let x = random_vec(n, seed);
                let back = daft(&idaft(&x, &p).unwrap(), &p).unwrap();
                prop_assert!(max_diff(&back, &x) < 1e-12);
                let there = idaft(&daft(&x, &p).unwrap(), &p).unwrap();
                prop_assert!(max_diff(&there, &x) < 1e-12);
            }
        }
    }
}
