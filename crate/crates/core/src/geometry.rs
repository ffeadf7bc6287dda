//! Array geometry: coordinate conventions, near-field path lengths, pure
//! delays between microphone pairs, and region-vertex sampling.
//!
//! Coordinate frame: the microphone array is centered at the origin with the
//! default pair on the x-axis. Azimuth is measured from +x in the horizontal
//! plane, elevation from horizontal, so the direction unit vector is
//! `(cos(el)cos(az), cos(el)sin(az), sin(el))`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

pub const SPEED_OF_SOUND: f64 = 343.0;
pub const DEFAULT_SAMPLE_RATE: f64 = 16000.0;

/// Source position in spherical coordinates relative to the array center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Location3D {
    /// Azimuth in radians, normalized to [0, 2π).
    pub azimuth: f64,
    /// Elevation in radians, within [−π/2, π/2].
    pub elevation: f64,
    /// Distance from the array center in meters, > 0.
    pub distance: f64,
}

impl Location3D {
    pub fn new(azimuth: f64, elevation: f64, distance: f64) -> Result<Self> {
        if !distance.is_finite() || distance <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "distance must be positive, got {distance}"
            )));
        }
        if !elevation.is_finite() || elevation < -PI / 2.0 || elevation > PI / 2.0 {
            return Err(Error::InvalidArgument(format!(
                "elevation must lie in [-pi/2, pi/2], got {elevation}"
            )));
        }
        if !azimuth.is_finite() {
            return Err(Error::InvalidArgument("azimuth must be finite".into()));
        }
        Ok(Self {
            azimuth: normalize_azimuth(azimuth),
            elevation,
            distance,
        })
    }

    /// Cartesian image of this location in the array frame.
    pub fn to_cartesian(&self) -> [f64; 3] {
        let (az, el, d) = (self.azimuth, self.elevation, self.distance);
        [
            d * el.cos() * az.cos(),
            d * el.cos() * az.sin(),
            d * el.sin(),
        ]
    }

    pub fn from_cartesian(p: [f64; 3]) -> Result<Self> {
        let d = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        if d <= 0.0 {
            return Err(Error::InvalidArgument(
                "cannot convert the origin to spherical coordinates".into(),
            ));
        }
        let elevation = (p[2] / d).clamp(-1.0, 1.0).asin();
        let azimuth = p[1].atan2(p[0]);
        Self::new(azimuth, elevation, d)
    }
}

fn normalize_azimuth(az: f64) -> f64 {
    let mut a = az % TAU;
    if a < 0.0 {
        a += TAU;
    }
    // rem can land exactly on 2π for tiny negative inputs
    if a >= TAU {
        a -= TAU;
    }
    a
}

/// Microphone array description: Cartesian positions plus the ordered
/// microphone pairs used for phase-difference features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicArray {
    positions: Vec<[f64; 3]>,
    pairs: Vec<(usize, usize)>,
}

impl MicArray {
    /// Builds an array, recentering positions so their mean is the origin.
    pub fn new(positions: Vec<[f64; 3]>, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let m = positions.len();
        if m < 2 {
            return Err(Error::Geometry(format!("need at least 2 mics, got {m}")));
        }
        let mut center = [0.0; 3];
        for p in &positions {
            for k in 0..3 {
                center[k] += p[k] / m as f64;
            }
        }
        let positions: Vec<[f64; 3]> = positions
            .iter()
            .map(|p| [p[0] - center[0], p[1] - center[1], p[2] - center[2]])
            .collect();
        for i in 0..m {
            for j in (i + 1)..m {
                let d2: f64 = (0..3)
                    .map(|k| (positions[i][k] - positions[j][k]).powi(2))
                    .sum();
                if d2 == 0.0 {
                    return Err(Error::Geometry(format!("mics {i} and {j} coincide")));
                }
            }
        }
        for &(p1, p2) in &pairs {
            if p1 >= m || p2 >= m || p1 == p2 {
                return Err(Error::Geometry(format!("invalid mic pair ({p1}, {p2})")));
            }
        }
        Ok(Self { positions, pairs })
    }

    /// Dual microphone with 11.8 cm spacing on the x-axis, single pair (0, 1).
    pub fn dual_default() -> Self {
        Self::new(
            vec![[0.059, 0.0, 0.0], [-0.059, 0.0, 0.0]],
            vec![(0, 1)],
        )
        .expect("default array is valid")
    }

    pub fn num_mics(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn position(&self, mic_index: usize) -> Result<[f64; 3]> {
        self.positions.get(mic_index).copied().ok_or(Error::Index {
            index: mic_index,
            len: self.positions.len(),
        })
    }

    pub fn pair(&self, pair_index: usize) -> Result<(usize, usize)> {
        self.pairs.get(pair_index).copied().ok_or(Error::Index {
            index: pair_index,
            len: self.pairs.len(),
        })
    }
}

/// Axis-aligned 3D box around a center location's Cartesian image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionBox {
    pub center: Location3D,
    /// Half extents (dx, dy, dz) in meters, all > 0.
    pub half_extents: [f64; 3],
}

/// Number of sampling points per region: 8 corners plus the center.
pub const REGION_SAMPLES: usize = 9;

impl RegionBox {
    pub fn new(center: Location3D, half_extents: [f64; 3]) -> Result<Self> {
        if half_extents.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(Error::InvalidRegion(format!(
                "half extents must be positive, got {half_extents:?}"
            )));
        }
        let b = Self {
            center,
            half_extents,
        };
        // a box enclosing the array origin has points with zero distance
        if b.contains([0.0, 0.0, 0.0]) {
            return Err(Error::InvalidRegion(format!(
                "region centered at {:?} with half extents {half_extents:?} contains the array origin",
                center.to_cartesian()
            )));
        }
        // every corner must map back to a valid location
        b.vertices()?;
        Ok(b)
    }

    /// Default half extents from head size and seat width.
    pub fn default_half_extents() -> [f64; 3] {
        [0.2, 0.25, 0.1]
    }

    /// The 8 box corners followed by the center (9 sampling points).
    ///
    /// Corner ordering is the 3-bit sign code of (dx, dy, dz): bit 0 → +x,
    /// bit 1 → +y, bit 2 → +z, so corner 0 is (−dx, −dy, −dz) and corner 7
    /// is (+dx, +dy, +dz). The center is last.
    pub fn vertices(&self) -> Result<Vec<Location3D>> {
        let c = self.center.to_cartesian();
        let [dx, dy, dz] = self.half_extents;
        let mut out = Vec::with_capacity(REGION_SAMPLES);
        for code in 0..8u8 {
            let sx = if code & 1 != 0 { 1.0 } else { -1.0 };
            let sy = if code & 2 != 0 { 1.0 } else { -1.0 };
            let sz = if code & 4 != 0 { 1.0 } else { -1.0 };
            let p = [c[0] + sx * dx, c[1] + sy * dy, c[2] + sz * dz];
            let loc = Location3D::from_cartesian(p).map_err(|_| {
                Error::InvalidRegion(format!("corner {code} at {p:?} has non-positive distance"))
            })?;
            out.push(loc);
        }
        out.push(self.center);
        Ok(out)
    }

    /// True if the Cartesian point lies inside this box.
    pub fn contains(&self, p: [f64; 3]) -> bool {
        let c = self.center.to_cartesian();
        (0..3).all(|k| (p[k] - c[k]).abs() <= self.half_extents[k])
    }
}

/// Euclidean distance from a source location to one microphone.
///
/// For the default x-axis dual-mic array this reduces to the law-of-cosines
/// form d² + d_om² − 2·d·d_om·cos(az)cos(el).
pub fn source_to_mic_distance(loc: &Location3D, array: &MicArray, mic_index: usize) -> Result<f64> {
    let mic = array.position(mic_index)?;
    let s = loc.to_cartesian();
    let d2: f64 = (0..3).map(|k| (s[k] - mic[k]).powi(2)).sum();
    Ok(d2.sqrt())
}

/// Pure delay in (fractional) samples between the two direct paths of a
/// microphone pair: τ = (d_{p1} − d_{p2})·fs/c.
pub fn pure_delay(
    loc: &Location3D,
    array: &MicArray,
    pair_index: usize,
    fs: f64,
    c: f64,
) -> Result<f64> {
    if !(fs > 0.0) || !(c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "fs and c must be positive (fs={fs}, c={c})"
        )));
    }
    let (p1, p2) = array.pair(pair_index)?;
    let d1 = source_to_mic_distance(loc, array, p1)?;
    let d2 = source_to_mic_distance(loc, array, p2)?;
    Ok((d1 - d2) * fs / c)
}

/// Absolute per-mic propagation delay in samples (used by steering vectors).
pub fn mic_delay_samples(
    loc: &Location3D,
    array: &MicArray,
    mic_index: usize,
    fs: f64,
    c: f64,
) -> Result<f64> {
    Ok(source_to_mic_distance(loc, array, mic_index)? * fs / c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loc(az: f64, el: f64, d: f64) -> Location3D {
        Location3D::new(az, el, d).unwrap()
    }

    #[test]
    fn collinear_distance() {
        let a = MicArray::dual_default();
        let d = source_to_mic_distance(&loc(0.0, 0.0, 1.0), &a, 0).unwrap();
        assert!((d - 0.941).abs() < 1e-12, "got {d}");
    }

    #[test]
    fn broadside_distance() {
        let a = MicArray::dual_default();
        let expect = (1.0f64 + 0.059 * 0.059).sqrt();
        for m in 0..2 {
            let d = source_to_mic_distance(&loc(PI / 2.0, 0.0, 1.0), &a, m).unwrap();
            assert!((d - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn sixty_degree_distance_matches_law_of_cosines() {
        // d² = d_om² + d² − 2·d_om·d·cosθcosφ evaluated independently
        let a = MicArray::dual_default();
        let th = 60f64.to_radians();
        let expect = (0.059f64.powi(2) + 1.0 - 2.0 * 0.059 * th.cos()).sqrt();
        let d = source_to_mic_distance(&loc(th, 0.0, 1.0), &a, 0).unwrap();
        assert!((d - expect).abs() < 1e-12);
        assert!((d - 0.971844).abs() < 1e-6, "got {d}");
    }

    #[test]
    fn invalid_mic_index_rejected() {
        let a = MicArray::dual_default();
        assert!(matches!(
            source_to_mic_distance(&loc(0.0, 0.0, 1.0), &a, 5),
            Err(Error::Index { .. })
        ));
    }

    #[test]
    fn endfire_delay() {
        let a = MicArray::dual_default();
        let tau = pure_delay(&loc(0.0, 0.0, 1.0), &a, 0, 16000.0, 343.0).unwrap();
        assert!((tau - (0.941 - 1.059) * 16000.0 / 343.0).abs() < 1e-9);
        assert!((tau + 5.5044).abs() < 1e-3, "got {tau}");
    }

    #[test]
    fn broadside_delay_zero() {
        let a = MicArray::dual_default();
        for d in [0.3, 1.0, 10.0] {
            let tau = pure_delay(&loc(PI / 2.0, 0.0, d), &a, 0, 16000.0, 343.0).unwrap();
            assert!(tau.abs() < 1e-12);
        }
    }

    #[test]
    fn sixty_degree_delay() {
        let a = MicArray::dual_default();
        let th = 60f64.to_radians();
        let d1 = (0.059f64.powi(2) + 1.0 - 2.0 * 0.059 * th.cos()).sqrt();
        let d2 = (0.059f64.powi(2) + 1.0 + 2.0 * 0.059 * th.cos()).sqrt();
        let expect = (d1 - d2) * 16000.0 / 343.0;
        let tau = pure_delay(&loc(th, 0.0, 1.0), &a, 0, 16000.0, 343.0).unwrap();
        assert!((tau - expect).abs() < 1e-12);
        assert!((tau + 2.7486).abs() < 1e-3, "got {tau}");
    }

    #[test]
    fn delay_antisymmetric_under_pair_reversal() {
        let a = MicArray::new(
            vec![[0.059, 0.0, 0.0], [-0.059, 0.0, 0.0]],
            vec![(0, 1), (1, 0)],
        )
        .unwrap();
        let l = loc(0.7, 0.2, 1.3);
        let t01 = pure_delay(&l, &a, 0, 16000.0, 343.0).unwrap();
        let t10 = pure_delay(&l, &a, 1, 16000.0, 343.0).unwrap();
        assert!((t01 + t10).abs() < 1e-12);
    }

    #[test]
    fn far_field_limit() {
        let a = MicArray::dual_default();
        let tau = pure_delay(&loc(0.0, 0.0, 1000.0), &a, 0, 16000.0, 343.0).unwrap();
        assert!((tau + 5.5044).abs() < 1e-3, "got {tau}");
    }

    #[test]
    fn delay_continuous_in_coordinates() {
        let a = MicArray::dual_default();
        let base = loc(1.0, 0.3, 0.3);
        let t0 = pure_delay(&base, &a, 0, 16000.0, 343.0).unwrap();
        for l in [
            loc(1.0 + 1e-6, 0.3, 0.3),
            loc(1.0, 0.3 + 1e-6, 0.3),
            loc(1.0, 0.3, 0.3 + 1e-6),
        ] {
            let t = pure_delay(&l, &a, 0, 16000.0, 343.0).unwrap();
            assert!((t - t0).abs() < 1e-3);
        }
    }

    #[test]
    fn spherical_round_trip() {
        let l = loc(2.3, -0.4, 1.7);
        let back = Location3D::from_cartesian(l.to_cartesian()).unwrap();
        assert!((back.azimuth - l.azimuth).abs() < 1e-9);
        assert!((back.elevation - l.elevation).abs() < 1e-9);
        assert!((back.distance - l.distance).abs() < 1e-9);
    }

    #[test]
    fn degenerate_box_rejected() {
        let c = loc(0.0, 0.0, 1.0);
        assert!(RegionBox::new(c, [0.0, 0.1, 0.1]).is_err());
    }

    #[test]
    fn vertex_distance_example() {
        // center at Cartesian (1,0,0), corner (1.1, 0.1, 0.1)
        let c = loc(0.0, 0.0, 1.0);
        let b = RegionBox::new(c, [0.1, 0.1, 0.1]).unwrap();
        let v = b.vertices().unwrap();
        assert_eq!(v.len(), REGION_SAMPLES);
        assert_eq!(v[8], c);
        // corner code 7 = (+,+,+)
        let d = v[7].distance;
        assert!((d - (1.1f64 * 1.1 + 0.01 + 0.01).sqrt()).abs() < 1e-9, "got {d}");
    }

    #[test]
    fn region_with_corner_through_origin_rejected() {
        let c = loc(0.0, 0.0, 0.05);
        assert!(matches!(
            RegionBox::new(c, [0.2, 0.25, 0.1]),
            Err(Error::InvalidRegion(_))
        ));
    }

    #[test]
    fn azimuth_normalized() {
        let l = loc(-0.5, 0.0, 1.0);
        assert!((l.azimuth - (TAU - 0.5)).abs() < 1e-12);
        assert!(Location3D::new(0.0, 2.0, 1.0).is_err());
        assert!(Location3D::new(0.0, 0.0, -1.0).is_err());
    }
}
