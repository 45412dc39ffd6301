//! Flat expanded-blade outlines.
//!
//! The outline runs radially along `x = r` from the hub to the tip with the
//! generator line on `y = 0` and the leading edge towards `-y`. Chord lengths
//! follow a piecewise-cubic fit of the Wageningen B-series radial chord ratios
//! (widest near 0.6R, closing to a point at the tip). By default the outline
//! is symmetric about the generator line; [`Outline::Skewed`] places the
//! leading edge at the series' tabulated fraction of the chord instead. The
//! expanded area is matched exactly; section thickness and rake are not
//! modelled.

use std::f64::consts::PI;

use super::{Mesh, TipMarkers};
use crate::error::{Error, Result};

/// Radius ratio `r/R` of the chord on which tip pitch is measured.
pub const TIP_STATION: f64 = 0.95;

/// Chord shape knots over the normalized span `s = (r - r_hub)/(R - r_hub)`,
/// taken from the B-series radial chord ratios between 0.2R and R.
const CHORD_KNOTS: [(f64, f64); 9] = [
    (0.0, 1.662),
    (0.125, 1.882),
    (0.25, 2.050),
    (0.375, 2.152),
    (0.5, 2.187),
    (0.625, 2.144),
    (0.75, 1.970),
    (0.875, 1.582),
    (1.0, 0.0),
];

/// Distance from the leading edge to the generator line as a fraction of the
/// local chord, over the same normalized span knots.
const LEADING_FRACTION: [f64; 9] = [0.616, 0.611, 0.599, 0.583, 0.558, 0.526, 0.481, 0.400, 0.0];

/// Chordwise placement of the outline about the generator line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Outline {
    /// Mid-chord on the generator line at every radius.
    #[default]
    Symmetric,
    /// Leading edge at the B-series fraction of the chord ahead of the
    /// generator line, giving a skewed-back tip.
    Skewed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanformSpec {
    pub diameter: f64,
    pub hub_diameter: f64,
    pub expanded_area_ratio: f64,
    pub blade_count: usize,
    pub target_element_count: usize,
    pub outline: Outline,
}

impl PlanformSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.diameter > 0.0 && self.hub_diameter > 0.0 && self.hub_diameter < self.diameter) {
            return Err(Error::InvalidMesh(format!(
                "need 0 < hub diameter ({}) < diameter ({})",
                self.hub_diameter, self.diameter
            )));
        }
        if self.hub_diameter / self.diameter >= TIP_STATION {
            return Err(Error::InvalidMesh(
                "hub reaches past the tip measurement station".into(),
            ));
        }
        if !(self.expanded_area_ratio > 0.0 && self.expanded_area_ratio < 2.0) {
            return Err(Error::InvalidMesh(format!(
                "expanded area ratio must lie in (0, 2), got {}",
                self.expanded_area_ratio
            )));
        }
        if self.blade_count < 2 {
            return Err(Error::InvalidMesh("a propeller needs at least 2 blades".into()));
        }
        if self.target_element_count < 8 {
            return Err(Error::InvalidMesh("target element count must be >= 8".into()));
        }
        Ok(())
    }

    /// Expanded area of one blade, `EAR * (pi D^2 / 4) / Z`.
    pub fn blade_area(&self) -> f64 {
        self.expanded_area_ratio * PI * self.diameter * self.diameter / 4.0 / self.blade_count as f64
    }
}

/// Leading-edge distance ahead of the generator line over the local chord,
/// linear between knots.
pub fn leading_fraction(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    let k = &CHORD_KNOTS;
    let seg = k.windows(2).position(|w| s <= w[1].0).unwrap_or(k.len() - 2);
    let t = (s - k[seg].0) / (k[seg + 1].0 - k[seg].0);
    LEADING_FRACTION[seg] * (1.0 - t) + LEADING_FRACTION[seg + 1] * t
}

/// Un-scaled chord shape at normalized span `s` in `[0, 1]` (zero at the tip).
pub fn chord_shape(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    let k = &CHORD_KNOTS;
    let n = k.len();
    let seg = k.windows(2).position(|w| s <= w[1].0).unwrap_or(n - 2);
    let slope = |i: usize| -> f64 {
        if i == 0 {
            (k[1].1 - k[0].1) / (k[1].0 - k[0].0)
        } else if i == n - 1 {
            (k[n - 1].1 - k[n - 2].1) / (k[n - 1].0 - k[n - 2].0)
        } else {
            (k[i + 1].1 - k[i - 1].1) / (k[i + 1].0 - k[i - 1].0)
        }
    };
    let (s0, c0) = k[seg];
    let (s1, c1) = k[seg + 1];
    let h = s1 - s0;
    let t = (s - s0) / h;
    let (t2, t3) = (t * t, t * t * t);
    (2.0 * t3 - 3.0 * t2 + 1.0) * c0
        + (t3 - 2.0 * t2 + t) * h * slope(seg)
        + (-2.0 * t3 + 3.0 * t2) * c1
        + (t3 - t2) * h * slope(seg + 1)
}

/// Meshes the expanded outline of one blade. The root chord at the hub radius
/// is clamped and the chord at [`TIP_STATION`] carries the tip markers.
pub fn gen_blade_mesh(spec: &PlanformSpec) -> Result<Mesh> {
    spec.validate()?;
    let radius = 0.5 * spec.diameter;
    let r_hub = 0.5 * spec.hub_diameter;
    let span = radius - r_hub;
    let s_tip = (TIP_STATION * radius - r_hub) / span;

    // polygon area of the unit-scale discretized outline is linear in the
    // chord scale, so it is sized after the node layout is fixed
    let target_area = spec.blade_area();
    let mean_chord = target_area / span;
    let h = (2.0 * target_area / spec.target_element_count as f64).sqrt();
    let cells_c = ((mean_chord / h).round() as usize).max(2);
    let n_c = cells_c + 1;
    let total = spec.target_element_count as f64;
    let n_r = (((total - cells_c as f64) / (2.0 * cells_c as f64)).round() as usize).max(2);

    let stations: Vec<f64> = (0..=n_r).map(|i| s_tip * i as f64 / n_r as f64).collect();
    let shapes: Vec<f64> = stations.iter().map(|&s| chord_shape(s)).collect();

    let mut unit_area = 0.0;
    for i in 0..n_r {
        let dx = (stations[i + 1] - stations[i]) * span;
        unit_area += 0.5 * (shapes[i] + shapes[i + 1]) * dx;
    }
    unit_area += 0.5 * shapes[n_r] * (1.0 - s_tip) * span;
    let scale = target_area / unit_area;

    let max_chord = shapes.iter().fold(0.0_f64, |m, &c| m.max(c)) * scale;
    if max_chord > 2.0 * span {
        return Err(Error::InvalidMesh(format!(
            "outline degenerates: max chord {max_chord:.4} m exceeds twice the blade span {span:.4} m"
        )));
    }

    let mut nodes = Vec::with_capacity((n_r + 1) * n_c + 1);
    for (i, &s) in stations.iter().enumerate() {
        let x = if i == 0 { r_hub } else { r_hub + s * span };
        let chord = shapes[i] * scale;
        for j in 0..n_c {
            // j = 0 is the leading edge
            let lead = match spec.outline {
                Outline::Symmetric => 0.5,
                Outline::Skewed => leading_fraction(s),
            };
            let y = chord * (j as f64 / cells_c as f64 - lead);
            nodes.push([x, y]);
        }
    }
    let apex = nodes.len();
    nodes.push([radius, 0.0]);

    let id = |i: usize, j: usize| i * n_c + j;
    let mut elements = Vec::with_capacity(2 * n_r * cells_c + cells_c);
    for i in 0..n_r {
        for j in 0..cells_c {
            let (n00, n10, n01, n11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            elements.push([n00, n10, n11]);
            elements.push([n00, n11, n01]);
        }
    }
    for j in 0..cells_c {
        elements.push([id(n_r, j), apex, id(n_r, j + 1)]);
    }

    let clamped = (0..n_c).map(|j| id(0, j)).collect();
    let tip = TipMarkers {
        leading: id(n_r, 0),
        trailing: id(n_r, n_c - 1),
    };
    Mesh::new(nodes, elements, clamped, Some(tip))
}
