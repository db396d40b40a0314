//! Dense solve of Z I = V and feed-point quantities.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::mesh::WireMesh;
use super::MomError;
use crate::units::Frequency;

/// Currents on every basis function for one excitation.
#[derive(Debug, Clone)]
pub struct CurrentSolution {
    /// Complex current coefficient per basis function (amperes at the
    /// segment centre, since bases peak at 1).
    pub currents: Vec<Complex64>,
    /// Applied excitation vector (volts per basis).
    pub excitation: Vec<Complex64>,
    /// Global indices of driven feed segments.
    pub feed_segments: Vec<usize>,
    pub frequency: Frequency,
}

impl CurrentSolution {
    /// Feed current of element `i`.
    pub fn feed_current(&self, i: usize) -> Complex64 {
        self.currents[self.feed_segments[i]]
    }

    /// Complex power delivered by all feeds: 1/2 sum V_f conj(I_f).
    pub fn input_power(&self) -> f64 {
        self.feed_segments
            .iter()
            .map(|&fs| 0.5 * (self.excitation[fs] * self.currents[fs].conj()).re)
            .sum()
    }
}

/// Solve the MoM system with a delta-gap excitation vector.
///
/// The residual ||Z I - V|| / ||V|| must come out below 1e-8; a numerically
/// singular matrix is reported with an estimated condition number.
pub fn solve_currents(
    z: &DMatrix<Complex64>,
    excitation: &[Complex64],
    mesh: &WireMesh,
    frequency: Frequency,
) -> Result<CurrentSolution, MomError> {
    let n = z.nrows();
    if excitation.len() != n {
        return Err(MomError::ExcitationMismatch(excitation.len(), n));
    }
    let v = DVector::from_column_slice(excitation);
    let lu = z.clone().lu();
    let solution = match lu.solve(&v) {
        Some(s) => s,
        None => {
            return Err(MomError::SingularMatrix {
                cond: estimate_condition(z),
            })
        }
    };
    let residual = (z * &solution - &v).norm() / v.norm().max(1e-300);
    if !residual.is_finite() || residual > 1e-8 {
        if !residual.is_finite() {
            return Err(MomError::SingularMatrix {
                cond: estimate_condition(z),
            });
        }
        return Err(MomError::ResidualTooLarge(residual));
    }
    Ok(CurrentSolution {
        currents: solution.iter().copied().collect(),
        excitation: excitation.to_vec(),
        feed_segments: mesh.feed_segments.clone(),
        frequency,
    })
}

/// Convenience: 1 V delta gap at the mesh's feed segment, zero elsewhere.
pub fn unit_feed_excitation(mesh: &WireMesh) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); mesh.basis_count()];
    v[mesh.feed_segment()] = Complex64::new(1.0, 0.0);
    v
}

/// Feed-point input impedance Z_in = V_feed / I_feed of the first element.
pub fn input_impedance(solution: &CurrentSolution) -> Result<Complex64, MomError> {
    let fs = solution.feed_segments[0];
    let i_feed = solution.currents[fs];
    if i_feed.norm() < 1e-12 {
        return Err(MomError::NoExcitation);
    }
    Ok(solution.excitation[fs] / i_feed)
}

/// Reflection coefficient magnitude in dB against a real reference impedance.
pub fn s11_db(z_in: Complex64, z0: f64) -> f64 {
    let gamma = (z_in - z0) / (z_in + z0);
    crate::units::field_db(gamma.norm())
}

fn estimate_condition(z: &DMatrix<Complex64>) -> f64 {
    // crude 1-norm estimate via the inverse; only reached on the error path
    let norm1 = |m: &DMatrix<Complex64>| -> f64 {
        (0..m.ncols())
            .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    match z.clone().lu().try_inverse() {
        Some(inv) => norm1(z) * norm1(&inv),
        None => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mom::mesh::mesh_dipole;
    use approx::assert_relative_eq;

    fn f300() -> Frequency {
        Frequency::from_megahertz(300.0).unwrap()
    }

    #[test]
    fn identity_system_returns_excitation() {
        let mesh = mesh_dipole(0.5, 1e-3, 11).unwrap();
        let n = mesh.basis_count();
        let z = DMatrix::from_diagonal_element(n, n, Complex64::new(1.0, 0.0));
        let v = unit_feed_excitation(&mesh);
        let sol = solve_currents(&z, &v, &mesh, f300()).unwrap();
        for (i, c) in sol.currents.iter().enumerate() {
            let expected = if i == mesh.feed_segment() { 1.0 } else { 0.0 };
            assert_relative_eq!(c.re, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn currents_scale_linearly_with_excitation() {
        let mesh = mesh_dipole(0.5, 1e-3, 15).unwrap();
        let z = crate::mom::fill_impedance_matrix(&mesh, f300()).unwrap();
        let v1 = unit_feed_excitation(&mesh);
        let v2: Vec<Complex64> = v1.iter().map(|x| x * 2.0).collect();
        let s1 = solve_currents(&z, &v1, &mesh, f300()).unwrap();
        let s2 = solve_currents(&z, &v2, &mesh, f300()).unwrap();
        for (a, b) in s1.currents.iter().zip(&s2.currents) {
            assert_relative_eq!(b.re, 2.0 * a.re, max_relative = 1e-10);
            assert_relative_eq!(b.im, 2.0 * a.im, max_relative = 1e-10);
        }
    }

    #[test]
    fn excitation_length_mismatch_rejected() {
        let mesh = mesh_dipole(0.5, 1e-3, 11).unwrap();
        let z = DMatrix::from_diagonal_element(11, 11, Complex64::new(1.0, 0.0));
        let v = vec![Complex64::new(1.0, 0.0); 7];
        assert!(matches!(
            solve_currents(&z, &v, &mesh, f300()),
            Err(MomError::ExcitationMismatch(7, 11))
        ));
    }

    #[test]
    fn singular_matrix_reports_condition() {
        let mesh = mesh_dipole(0.5, 1e-3, 11).unwrap();
        let n = mesh.basis_count();
        let z = DMatrix::from_element(n, n, Complex64::new(1.0, 0.0));
        let v = unit_feed_excitation(&mesh);
        let err = solve_currents(&z, &v, &mesh, f300()).unwrap_err();
        assert!(matches!(
            err,
            MomError::SingularMatrix { .. } | MomError::ResidualTooLarge(_)
        ));
    }

    #[test]
    fn perfect_match_definition() {
        // V = 1, I = 0.02 A real -> 50 ohms, S11 -> -inf dB
        let z_in = Complex64::new(1.0, 0.0) / Complex64::new(0.02, 0.0);
        assert_relative_eq!(z_in.re, 50.0);
        assert!(s11_db(z_in, 50.0) < -200.0);
    }

    #[test]
    fn zero_feed_current_is_no_excitation() {
        let sol = CurrentSolution {
            currents: vec![Complex64::new(0.0, 0.0)],
            excitation: vec![Complex64::new(1.0, 0.0)],
            feed_segments: vec![0],
            frequency: f300(),
        };
        assert!(matches!(input_impedance(&sol), Err(MomError::NoExcitation)));
    }
}
