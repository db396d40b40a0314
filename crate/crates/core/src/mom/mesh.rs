//! Wire meshing: rods are cut into an odd number of equal segments so the
//! feed lands on the centre segment of the driven rod. One triangular basis
//! function per segment, peaked at the segment centre; the first and last
//! triangles fall to zero at the wire ends, which enforces the open-end
//! current condition.

use super::{MomError, WireAntenna};

/// One straight z-directed rod.
#[derive(Debug, Clone)]
pub struct Wire {
    pub x: f64,
    pub y: f64,
    pub z_start: f64,
    pub z_end: f64,
    pub radius: f64,
    pub n_segments: usize,
    pub label: String,
}

impl Wire {
    pub fn length(&self) -> f64 {
        self.z_end - self.z_start
    }

    pub fn segment_length(&self) -> f64 {
        self.length() / self.n_segments as f64
    }

    /// Centre of local segment `i`.
    pub fn segment_center(&self, i: usize) -> f64 {
        self.z_start + (i as f64 + 0.5) * self.segment_length()
    }
}

/// One linear piece of a basis function: f goes linearly from `f_a` at `z_a`
/// to `f_b` at `z_b`.
#[derive(Debug, Clone, Copy)]
pub struct Piece {
    pub z_a: f64,
    pub z_b: f64,
    pub f_a: f64,
    pub f_b: f64,
}

impl Piece {
    pub fn width(&self) -> f64 {
        self.z_b - self.z_a
    }

    pub fn slope(&self) -> f64 {
        (self.f_b - self.f_a) / self.width()
    }

    /// Basis value at z (only meaningful inside the piece).
    pub fn value_at(&self, z: f64) -> f64 {
        self.f_a + self.slope() * (z - self.z_a)
    }
}

/// Triangular basis function: the two linear pieces around one segment centre.
#[derive(Debug, Clone, Copy)]
pub struct Basis {
    pub wire_index: usize,
    pub pieces: [Piece; 2],
}

/// Segmented multi-wire geometry with one basis function per segment.
#[derive(Debug, Clone)]
pub struct WireMesh {
    pub wires: Vec<Wire>,
    /// Global basis indices of the driven-rod feed segments, one per element.
    pub feed_segments: Vec<usize>,
    bases: Vec<Basis>,
}

impl WireMesh {
    fn build(wires: Vec<Wire>, feed_segments: Vec<usize>) -> Result<Self, MomError> {
        for w in &wires {
            if w.segment_length() <= 4.0 * w.radius {
                return Err(MomError::MeshTooFine {
                    wire: w.label.clone(),
                    segment_length: w.segment_length(),
                    radius: w.radius,
                });
            }
        }
        // no two wires may share an axis with overlapping extents
        for i in 0..wires.len() {
            for j in (i + 1)..wires.len() {
                let (a, b) = (&wires[i], &wires[j]);
                let lateral = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt();
                if lateral < a.radius + b.radius && a.z_start < b.z_end && b.z_start < a.z_end {
                    return Err(MomError::OverlappingWires(i, j));
                }
            }
        }
        let mut bases = Vec::new();
        for (wi, w) in wires.iter().enumerate() {
            for i in 0..w.n_segments {
                let zc = w.segment_center(i);
                let rise = if i == 0 {
                    Piece { z_a: w.z_start, z_b: zc, f_a: 0.0, f_b: 1.0 }
                } else {
                    Piece { z_a: w.segment_center(i - 1), z_b: zc, f_a: 0.0, f_b: 1.0 }
                };
                let fall = if i == w.n_segments - 1 {
                    Piece { z_a: zc, z_b: w.z_end, f_a: 1.0, f_b: 0.0 }
                } else {
                    Piece { z_a: zc, z_b: w.segment_center(i + 1), f_a: 1.0, f_b: 0.0 }
                };
                bases.push(Basis { wire_index: wi, pieces: [rise, fall] });
            }
        }
        Ok(Self { wires, feed_segments, bases })
    }

    pub fn basis_count(&self) -> usize {
        self.bases.len()
    }

    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    /// Lateral distance used in the reduced kernel for a pair of wires:
    /// the wire radius on the same wire, the axis separation otherwise.
    pub fn kernel_rho(&self, wire_a: usize, wire_b: usize) -> f64 {
        if wire_a == wire_b {
            self.wires[wire_a].radius
        } else {
            let (a, b) = (&self.wires[wire_a], &self.wires[wire_b]);
            ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
        }
    }

    /// The feed segment of the first (or only) element.
    pub fn feed_segment(&self) -> usize {
        self.feed_segments[0]
    }
}

fn check_segment_count(segments_per_wire: usize) -> Result<(), MomError> {
    if segments_per_wire % 2 == 0 || segments_per_wire < 11 {
        return Err(MomError::BadSegmentCount(segments_per_wire));
    }
    Ok(())
}

/// A driven + reflector element placed on the array axis (y).
#[derive(Debug, Clone, Copy)]
pub struct PlacedElement {
    pub antenna: WireAntenna,
    pub y: f64,
}

/// Mesh a single driven + reflector element centred at the origin.
///
/// The driven rod is meshed first (global segments `0..n`), so the feed lands
/// at global index `n / 2`; the reflector occupies `n..2n`.
pub fn mesh_antenna(antenna: &WireAntenna, segments_per_wire: usize) -> Result<WireMesh, MomError> {
    mesh_placed(
        &[PlacedElement { antenna: *antenna, y: 0.0 }],
        segments_per_wire,
    )
}

/// Mesh identical elements placed along the array axis at the given positions.
pub fn mesh_element_array(
    antenna: &WireAntenna,
    y_positions: &[f64],
    segments_per_wire: usize,
) -> Result<WireMesh, MomError> {
    let placed: Vec<PlacedElement> = y_positions
        .iter()
        .map(|&y| PlacedElement { antenna: *antenna, y })
        .collect();
    mesh_placed(&placed, segments_per_wire)
}

/// Mesh a list of placed elements. Every driven rod carries a feed at its
/// centre segment; wires of one element are contiguous in the global
/// segment numbering (driven first).
pub fn mesh_placed(
    elements: &[PlacedElement],
    segments_per_wire: usize,
) -> Result<WireMesh, MomError> {
    check_segment_count(segments_per_wire)?;
    let mut wires = Vec::new();
    let mut feeds = Vec::new();
    for (i, el) in elements.iter().enumerate() {
        el.antenna.validate()?;
        feeds.push(wires.len() * segments_per_wire + segments_per_wire / 2);
        wires.push(Wire {
            x: 0.0,
            y: el.y,
            z_start: -el.antenna.driven_length / 2.0,
            z_end: el.antenna.driven_length / 2.0,
            radius: el.antenna.wire_radius,
            n_segments: segments_per_wire,
            label: format!("driven[{i}]"),
        });
        wires.push(Wire {
            x: -el.antenna.separation,
            y: el.y,
            z_start: -el.antenna.reflector_length / 2.0,
            z_end: el.antenna.reflector_length / 2.0,
            radius: el.antenna.wire_radius,
            n_segments: segments_per_wire,
            label: format!("reflector[{i}]"),
        });
    }
    WireMesh::build(wires, feeds)
}

/// Mesh a lone centre-fed dipole (used by the solver oracles).
pub fn mesh_dipole(length: f64, radius: f64, segments: usize) -> Result<WireMesh, MomError> {
    check_segment_count(segments)?;
    let wires = vec![Wire {
        x: 0.0,
        y: 0.0,
        z_start: -length / 2.0,
        z_end: length / 2.0,
        radius,
        n_segments: segments,
        label: "dipole".into(),
    }];
    WireMesh::build(wires, vec![segments / 2])
}
