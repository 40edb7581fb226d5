//! Jones calculus: 2x2 operators acting on dual-polarization fields.

use num_complex::Complex64;

use super::fft::{fft_in_place, ifft_in_place};
use super::rng::Rng;
use super::signal::DualPolSignal;
use crate::error::{Error, Result};

/// Frequency-flat 2x2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesMatrix {
    pub m00: Complex64,
    pub m01: Complex64,
    pub m10: Complex64,
    pub m11: Complex64,
}

impl JonesMatrix {
    pub const IDENTITY: JonesMatrix = JonesMatrix {
        m00: Complex64::new(1.0, 0.0),
        m01: Complex64::new(0.0, 0.0),
        m10: Complex64::new(0.0, 0.0),
        m11: Complex64::new(1.0, 0.0),
    };

    pub fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        JonesMatrix { m00, m01, m10, m11 }
    }

    /// Real rotation of the polarization axes by `theta` radians.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        JonesMatrix::new(
            Complex64::new(c, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(c, 0.0),
        )
    }

    /// Waveplate with fast axis at `axis` radians and retardance `phi`:
    /// R(axis) * diag(e^{+j phi/2}, e^{-j phi/2}) * R(-axis).
    pub fn waveplate(axis: f64, phi: f64) -> Self {
        let d = JonesMatrix::new(
            Complex64::from_polar(1.0, 0.5 * phi),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::from_polar(1.0, -0.5 * phi),
        );
        JonesMatrix::rotation(axis) * d * JonesMatrix::rotation(-axis)
    }

    /// Endless rotation parametrized by retarders about the 0 deg and 45 deg
    /// axes: W(0, a1) then W(45 deg, a2) then W(0, a3).
    pub fn from_euler(a1: f64, a2: f64, a3: f64) -> Self {
        let w1 = JonesMatrix::waveplate(0.0, a1);
        let w2 = JonesMatrix::waveplate(std::f64::consts::FRAC_PI_4, a2);
        let w3 = JonesMatrix::waveplate(0.0, a3);
        w3 * w2 * w1
    }

    /// Haar-distributed random unitary (up to global phase).
    pub fn random_unitary(rng: &mut Rng) -> Self {
        let a = rng.complex_normal();
        let b = rng.complex_normal();
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (a, b) = (a / norm, b / norm);
        let phase = Complex64::from_polar(1.0, std::f64::consts::TAU * rng.uniform());
        JonesMatrix::new(a, -b.conj() * phase, b, a.conj() * phase)
    }

    pub fn adjoint(&self) -> Self {
        JonesMatrix::new(
            self.m00.conj(),
            self.m10.conj(),
            self.m01.conj(),
            self.m11.conj(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        JonesMatrix::new(self.m00 * s, self.m01 * s, self.m10 * s, self.m11 * s)
    }

    /// Apply to one Jones vector.
    #[inline]
    pub fn apply(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        (
            self.m00 * x + self.m01 * y,
            self.m10 * x + self.m11 * y,
        )
    }

    /// Max-norm of J^H J - I; zero for a unitary matrix.
    pub fn unitarity_residual(&self) -> f64 {
        let g = self.adjoint() * *self;
        let one = Complex64::new(1.0, 0.0);
        [
            (g.m00 - one).norm(),
            g.m01.norm(),
            g.m10.norm(),
            (g.m11 - one).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }
}

impl std::ops::Mul for JonesMatrix {
    type Output = JonesMatrix;

    fn mul(self, rhs: JonesMatrix) -> JonesMatrix {
        JonesMatrix::new(
            self.m00 * rhs.m00 + self.m01 * rhs.m10,
            self.m00 * rhs.m01 + self.m01 * rhs.m11,
            self.m10 * rhs.m00 + self.m11 * rhs.m10,
            self.m10 * rhs.m01 + self.m11 * rhs.m11,
        )
    }
}

/// 2x2 operator on a dual-polarization signal: a single matrix applied per
/// sample, or one matrix per FFT bin for dispersive elements.
#[derive(Debug, Clone)]
pub enum JonesOperator {
    Flat(JonesMatrix),
    PerBin(Vec<JonesMatrix>),
}

impl JonesOperator {
    pub fn identity() -> Self {
        JonesOperator::Flat(JonesMatrix::IDENTITY)
    }

    /// Worst unitarity residual across frequency.
    pub fn unitarity_residual(&self) -> f64 {
        match self {
            JonesOperator::Flat(m) => m.unitarity_residual(),
            JonesOperator::PerBin(ms) => ms
                .iter()
                .map(JonesMatrix::unitarity_residual)
                .fold(0.0, f64::max),
        }
    }

    /// Apply the operator. Frequency-flat matrices act per sample;
    /// per-bin families act through forward FFT, bin-wise multiply, inverse
    /// FFT. Sample rate and wavelength metadata are preserved.
    pub fn apply(&self, sig: &DualPolSignal) -> Result<DualPolSignal> {
        match self {
            JonesOperator::Flat(m) => {
                let (xs, ys) = apply_flat(m, sig.x(), sig.y());
                sig.with_components(xs, ys)
            }
            JonesOperator::PerBin(ms) => {
                if ms.len() != sig.len() {
                    return Err(Error::LengthMismatch {
                        left: ms.len(),
                        right: sig.len(),
                    });
                }
                let mut xs = sig.x().to_vec();
                let mut ys = sig.y().to_vec();
                fft_in_place(&mut xs);
                fft_in_place(&mut ys);
                for ((x, y), m) in xs.iter_mut().zip(ys.iter_mut()).zip(ms) {
                    let (nx, ny) = m.apply(*x, *y);
                    *x = nx;
                    *y = ny;
                }
                ifft_in_place(&mut xs);
                ifft_in_place(&mut ys);
                sig.with_components(xs, ys)
            }
        }
    }
}

fn apply_flat(
    m: &JonesMatrix,
    x: &[Complex64],
    y: &[Complex64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut xs = Vec::with_capacity(x.len());
    let mut ys = Vec::with_capacity(y.len());
    for (a, b) in x.iter().zip(y) {
        let (nx, ny) = m.apply(*a, *b);
        xs.push(nx);
        ys.push(ny);
    }
    (xs, ys)
}

/// Apply a Jones operator to a signal; see [`JonesOperator::apply`].
pub fn apply_jones(sig: &DualPolSignal, op: &JonesOperator) -> Result<DualPolSignal> {
    op.apply(sig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::signal::C_BAND_WAVELENGTH;

    fn random_signal(rng: &mut Rng, n: usize) -> DualPolSignal {
        let x: Vec<Complex64> = (0..n).map(|_| rng.complex_normal()).collect();
        let y: Vec<Complex64> = (0..n).map(|_| rng.complex_normal()).collect();
        DualPolSignal::new(x, y, 10.0e9, C_BAND_WAVELENGTH).unwrap()
    }

    #[test]
    fn identity_is_bit_exact() {
        let mut rng = Rng::new(1).stream("sig");
        let sig = random_signal(&mut rng, 128);
        let out = JonesOperator::identity().apply(&sig).unwrap();
        assert_eq!(sig.x(), out.x());
        assert_eq!(sig.y(), out.y());
    }

    #[test]
    fn swap_matrix_exchanges_components() {
        let mut rng = Rng::new(2).stream("sig");
        let sig = random_signal(&mut rng, 64);
        let swap = JonesMatrix::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        );
        let out = JonesOperator::Flat(swap).apply(&sig).unwrap();
        assert_eq!(out.x(), sig.y());
        assert_eq!(out.y(), sig.x());
    }

    #[test]
    fn unitary_preserves_power() {
        // 1000 random unitaries on random signals, relative error <= 1e-10.
        let root = Rng::new(3);
        let mut urng = root.stream("unitaries");
        let mut srng = root.stream("signals");
        for _ in 0..1000 {
            let u = JonesMatrix::random_unitary(&mut urng);
            assert!(u.is_unitary(1e-12));
            let sig = random_signal(&mut srng, 32);
            let out = JonesOperator::Flat(u).apply(&sig).unwrap();
            let rel = (out.total_power() - sig.total_power()).abs() / sig.total_power();
            assert!(rel <= 1e-10, "relative power error {rel}");
        }
    }

    #[test]
    fn fft_path_matches_direct_path() {
        let root = Rng::new(4);
        let mut rng = root.stream("sig");
        let sig = random_signal(&mut rng, 256);
        let u = JonesMatrix::random_unitary(&mut root.stream("u"));
        let direct = JonesOperator::Flat(u).apply(&sig).unwrap();
        let tabulated = JonesOperator::PerBin(vec![u; sig.len()]).apply(&sig).unwrap();
        for (a, b) in direct.x().iter().zip(tabulated.x()) {
            assert!((a - b).norm() < 1e-10);
        }
        for (a, b) in direct.y().iter().zip(tabulated.y()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn per_bin_length_mismatch_rejected() {
        let mut rng = Rng::new(5).stream("sig");
        let sig = random_signal(&mut rng, 64);
        let op = JonesOperator::PerBin(vec![JonesMatrix::IDENTITY; 32]);
        assert!(op.apply(&sig).is_err());
    }

    #[test]
    fn half_wave_plate_at_zero_axis() {
        let hwp = JonesMatrix::waveplate(0.0, std::f64::consts::PI);
        assert!((hwp.m00 - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((hwp.m11 - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!(hwp.m01.norm() < 1e-15);
        assert!(hwp.m10.norm() < 1e-15);
    }

    #[test]
    fn euler_composition_is_unitary() {
        let mut rng = Rng::new(6).stream("angles");
        for _ in 0..200 {
            let m = JonesMatrix::from_euler(
                rng.uniform() * 20.0 - 10.0,
                rng.uniform() * 20.0 - 10.0,
                rng.uniform() * 20.0 - 10.0,
            );
            assert!(m.is_unitary(1e-12));
        }
    }

    proptest::proptest! {
        #[test]
        fn waveplate_preserves_intensity(
            axis in -10.0f64..10.0,
            phi in -20.0f64..20.0,
            xr in -2.0f64..2.0,
            xi in -2.0f64..2.0,
            yr in -2.0f64..2.0,
            yi in -2.0f64..2.0,
        ) {
            let w = JonesMatrix::waveplate(axis, phi);
            let (ox, oy) = w.apply(Complex64::new(xr, xi), Complex64::new(yr, yi));
            let before = xr * xr + xi * xi + yr * yr + yi * yi;
            let after = ox.norm_sqr() + oy.norm_sqr();
            proptest::prop_assert!((after - before).abs() <= 1e-12 * before.max(1.0));
        }

        #[test]
        fn euler_rotation_stays_unitary(
            a1 in -20.0f64..20.0,
            a2 in -20.0f64..20.0,
            a3 in -20.0f64..20.0,
        ) {
            let m = JonesMatrix::from_euler(a1, a2, a3);
            proptest::prop_assert!(m.is_unitary(1e-12));
        }
    }
}
