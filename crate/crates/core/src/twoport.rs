//! Complex two-port algebra: ABCD (chain) matrices, S-parameters and the
//! conversions between them.
//!
//! The ABCD representation is used for building cascades of circuit
//! elements (series impedances, shunt admittances, transmission-line
//! sections); S-parameters referenced to `z0` are the user-facing quantity.
//! Conversion formulas are the standard ones, e.g.
//! `S21 = 2 / (A + B/Z0 + C*Z0 + D)`.

use num_complex::Complex64;
use thiserror::Error;

use crate::units::Frequency;

#[derive(Debug, Error)]
pub enum TwoPortError {
    #[error("reference impedance must be positive, got {0}")]
    NonPositiveZ0(f64),
    #[error("degenerate network: ABCD-to-S denominator vanished at sample {index} (f = {freq_hz} Hz)")]
    DegenerateNetwork { index: usize, freq_hz: f64 },
    #[error("ABCD entries must be finite (sample {0})")]
    NonFiniteEntry(usize),
}

/// One 2x2 complex chain matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abcd {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Abcd {
    pub fn identity() -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    /// Series impedance element: A = D = 1, B = Z, C = 0.
    pub fn series(z: Complex64) -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            b: z,
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    /// Shunt admittance element: A = D = 1, B = 0, C = Y.
    pub fn shunt(y: Complex64) -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: y,
            d: Complex64::new(1.0, 0.0),
        }
    }

    /// Transmission-line section of characteristic impedance `zc` and complex
    /// propagation `gamma_len = (alpha + j beta) * length`:
    /// A = D = cosh(gamma l), B = Zc sinh(gamma l), C = sinh(gamma l)/Zc.
    pub fn line(zc: Complex64, gamma_len: Complex64) -> Self {
        let ch = gamma_len.cosh();
        let sh = gamma_len.sinh();
        Self {
            a: ch,
            b: zc * sh,
            c: sh / zc,
            d: ch,
        }
    }

    /// Chain multiplication: `self` followed by `next` (toward the load).
    pub fn cascade(&self, next: &Abcd) -> Abcd {
        Abcd {
            a: self.a * next.a + self.b * next.c,
            b: self.a * next.b + self.b * next.d,
            c: self.c * next.a + self.d * next.c,
            d: self.c * next.b + self.d * next.d,
        }
    }

    /// AD - BC; equals 1 for reciprocal networks.
    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn is_finite(&self) -> bool {
        [self.a, self.b, self.c, self.d]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// S-parameters of one two-port at one frequency sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SParams {
    pub s11: Complex64,
    pub s12: Complex64,
    pub s21: Complex64,
    pub s22: Complex64,
}

impl SParams {
    /// |S12| in dB (20 log10).
    pub fn s12_db(&self) -> f64 {
        crate::units::field_db(self.s12.norm())
    }

    /// |S11| in dB (20 log10).
    pub fn s11_db(&self) -> f64 {
        crate::units::field_db(self.s11.norm())
    }
}

/// A two-port sampled over a frequency grid, held as ABCD matrices with a
/// common reference impedance.
#[derive(Debug, Clone)]
pub struct ComplexTwoPort {
    pub freqs: Vec<Frequency>,
    pub abcd: Vec<Abcd>,
    pub z0: f64,
}

impl ComplexTwoPort {
    pub fn new(freqs: Vec<Frequency>, abcd: Vec<Abcd>, z0: f64) -> Result<Self, TwoPortError> {
        if !(z0 > 0.0) {
            return Err(TwoPortError::NonPositiveZ0(z0));
        }
        assert_eq!(freqs.len(), abcd.len(), "one ABCD matrix per frequency sample");
        Ok(Self { freqs, abcd, z0 })
    }

    /// Cascade another network sample-by-sample (grids must match).
    pub fn cascade(&self, other: &ComplexTwoPort) -> ComplexTwoPort {
        assert_eq!(self.freqs.len(), other.freqs.len());
        let abcd = self
            .abcd
            .iter()
            .zip(&other.abcd)
            .map(|(a, b)| a.cascade(b))
            .collect();
        ComplexTwoPort {
            freqs: self.freqs.clone(),
            abcd,
            z0: self.z0,
        }
    }
}

/// Convert a single ABCD matrix to S-parameters referenced to `z0`.
pub fn abcd_sample_to_s(m: &Abcd, z0: f64) -> Result<SParams, TwoPortError> {
    if !(z0 > 0.0) {
        return Err(TwoPortError::NonPositiveZ0(z0));
    }
    let b_z0 = m.b / z0;
    let c_z0 = m.c * z0;
    let denom = m.a + b_z0 + c_z0 + m.d;
    if denom.norm() < 1e-300 {
        return Err(TwoPortError::DegenerateNetwork { index: 0, freq_hz: f64::NAN });
    }
    let det = m.determinant();
    Ok(SParams {
        s11: (m.a + b_z0 - c_z0 - m.d) / denom,
        s12: 2.0 * det / denom,
        s21: Complex64::new(2.0, 0.0) / denom,
        s22: (-m.a + b_z0 - c_z0 + m.d) / denom,
    })
}

/// Convert a whole network to S-parameters, one set per frequency sample.
pub fn abcd_to_s(network: &ComplexTwoPort) -> Result<Vec<SParams>, TwoPortError> {
    network
        .abcd
        .iter()
        .enumerate()
        .map(|(i, m)| {
            if !m.is_finite() {
                return Err(TwoPortError::NonFiniteEntry(i));
            }
            abcd_sample_to_s(m, network.z0).map_err(|e| match e {
                TwoPortError::DegenerateNetwork { .. } => TwoPortError::DegenerateNetwork {
                    index: i,
                    freq_hz: network.freqs[i].hertz(),
                },
                other => other,
            })
        })
        .collect()
}

/// Inverse conversion, S to ABCD (same reference impedance).
pub fn s_to_abcd(s: &SParams, z0: f64) -> Abcd {
    let one = Complex64::new(1.0, 0.0);
    let two_s21 = 2.0 * s.s21;
    let s12s21 = s.s12 * s.s21;
    Abcd {
        a: ((one + s.s11) * (one - s.s22) + s12s21) / two_s21,
        b: z0 * ((one + s.s11) * (one + s.s22) - s12s21) / two_s21,
        c: ((one - s.s11) * (one - s.s22) - s12s21) / (two_s21 * z0),
        d: ((one - s.s11) * (one + s.s22) + s12s21) / two_s21,
    }
}
