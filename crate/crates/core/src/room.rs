//! Shoebox image-source simulation and scene rendering for the in-car
//! geometry: Sabine absorption, fractionally delayed image impulses, and
//! SIR/SNR-controlled mixing of reverberant stems.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Location3D, MicArray};

/// Shoebox room with uniform wall absorption derived from T60.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Room {
    /// Interior dimensions (Lx, Ly, Lz) in meters.
    pub dims: [f64; 3],
    /// Reverberation time in seconds, within [0, 1].
    pub t60: f64,
    /// Maximum total reflection order per image.
    pub max_order: usize,
}

pub const DEFAULT_CAR_DIMS: [f64; 3] = [2.8, 1.5, 1.3];
pub const DEFAULT_MAX_ORDER: usize = 20;
/// Images with amplitude below this fraction of the direct path are dropped.
const IMAGE_AMPLITUDE_CUTOFF: f64 = 1e-4;
/// Windowed-sinc fractional-delay filter length (odd).
const SINC_TAPS: isize = 81;

impl Room {
    pub fn new(dims: [f64; 3], t60: f64, max_order: usize) -> Result<Self> {
        if dims.iter().any(|&d| !(d > 0.0)) {
            return Err(Error::Geometry(format!("room dims must be positive: {dims:?}")));
        }
        if !(0.0..=1.0).contains(&t60) {
            return Err(Error::InvalidArgument(format!(
                "t60 must lie in [0, 1] s, got {t60}"
            )));
        }
        Ok(Self { dims, t60, max_order })
    }

    pub fn car_default(t60: f64) -> Result<Self> {
        Self::new(DEFAULT_CAR_DIMS, t60, DEFAULT_MAX_ORDER)
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|k| p[k] > 0.0 && p[k] < self.dims[k])
    }
}

/// Sabine inversion: a = 0.161·V/(S·T60), clamped to (0, 1].
/// T60 = 0 is the anechoic convention (full absorption).
pub fn absorption_from_t60(room: &Room) -> f64 {
    if room.t60 <= 0.0 {
        return 1.0;
    }
    let [lx, ly, lz] = room.dims;
    let volume = lx * ly * lz;
    let surface = 2.0 * (lx * ly + lx * lz + ly * lz);
    let a = 0.161 * volume / (surface * room.t60);
    if a > 1.0 {
        log::warn!(
            "Sabine absorption {a:.3} exceeds 1 for dims {:?}, t60 {}; clamping",
            room.dims,
            room.t60
        );
        return 1.0;
    }
    a
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (std::f64::consts::PI * x).sin() / (std::f64::consts::PI * x)
    }
}

/// Adds an impulse of amplitude `amp` at fractional sample `delay` using an
/// 81-tap Hann-windowed sinc. Acausal leading taps are truncated.
fn add_fractional_impulse(rir: &mut Vec<f64>, delay: f64, amp: f64) {
    let half = SINC_TAPS / 2;
    let n0 = delay.round() as isize;
    let frac = delay - n0 as f64;
    let needed = (n0 + half + 1) as usize;
    if rir.len() < needed {
        rir.resize(needed, 0.0);
    }
    for j in -half..=half {
        let n = n0 + j;
        if n < 0 {
            continue;
        }
        let w = 0.5 * (1.0 + (std::f64::consts::PI * j as f64 / half as f64).cos());
        rir[n as usize] += amp * sinc(j as f64 - frac) * w;
    }
}

/// 1D image positions and reflection counts along one axis: 2kL + s with
/// |2k| reflections and 2kL − s with |2k − 1| reflections.
fn axis_images(s: f64, len: f64, max_order: usize) -> Vec<(f64, usize)> {
    let mut out = Vec::new();
    let kmax = (max_order as isize + 1) / 2 + 1;
    for k in -kmax..=kmax {
        let r_same = (2 * k).unsigned_abs();
        if r_same <= max_order {
            out.push((2.0 * k as f64 * len + s, r_same));
        }
        let r_mirr = (2 * k - 1).unsigned_abs();
        if r_mirr <= max_order {
            out.push((2.0 * k as f64 * len - s, r_mirr));
        }
    }
    out
}

/// Image-source room impulse response from `source` to `mic` (room
/// coordinates, meters). Amplitude per image is β^order/(4π·dist) with
/// β = √(1 − a) the pressure reflection coefficient.
pub fn simulate_rir(
    room: &Room,
    source: [f64; 3],
    mic: [f64; 3],
    fs: f64,
    c: f64,
) -> Result<Vec<f64>> {
    if !room.contains(source) {
        return Err(Error::Geometry(format!("source {source:?} outside room")));
    }
    if !room.contains(mic) {
        return Err(Error::Geometry(format!("mic {mic:?} outside room")));
    }
    if source == mic {
        return Err(Error::Geometry("source coincides with mic".into()));
    }
    let beta = (1.0 - absorption_from_t60(room)).max(0.0).sqrt();
    let direct_dist = (0..3)
        .map(|k| (source[k] - mic[k]).powi(2))
        .sum::<f64>()
        .sqrt();
    let direct_amp = 1.0 / (4.0 * std::f64::consts::PI * direct_dist.max(1e-3));

    let xs = axis_images(source[0], room.dims[0], room.max_order);
    let ys = axis_images(source[1], room.dims[1], room.max_order);
    let zs = axis_images(source[2], room.dims[2], room.max_order);

    let mut rir = Vec::new();
    for &(ix, rx) in &xs {
        for &(iy, ry) in &ys {
            let rxy = rx + ry;
            if rxy > room.max_order {
                continue;
            }
            for &(iz, rz) in &zs {
                let order = rxy + rz;
                if order > room.max_order {
                    continue;
                }
                let dist = ((ix - mic[0]).powi(2) + (iy - mic[1]).powi(2) + (iz - mic[2]).powi(2))
                    .sqrt()
                    .max(1e-3);
                let amp = beta.powi(order as i32) / (4.0 * std::f64::consts::PI * dist);
                if amp < IMAGE_AMPLITUDE_CUTOFF * direct_amp {
                    continue;
                }
                add_fractional_impulse(&mut rir, dist * fs / c, amp);
            }
        }
    }
    Ok(rir)
}

/// Role of a source in a scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceRole {
    Target,
    Interferer,
    Noise,
}

/// One source in a scene: a region label, its location relative to the
/// array center, and its mixing role.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneSource {
    pub region_id: String,
    pub location: Location3D,
    pub role: SourceRole,
}

/// Full scene description: room, array placement, sources and mix ratios.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneSpec {
    pub room: Room,
    /// Array center in room coordinates.
    pub array_origin: [f64; 3],
    pub array: MicArray,
    pub sources: Vec<SceneSource>,
    /// Target-to-interferer power ratio (interferers jointly), dB.
    pub sir_db: f64,
    /// Target-to-noise power ratio (noises jointly), dB.
    pub snr_db: f64,
    pub seed: u64,
    pub fs: f64,
    pub c: f64,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let targets = self
            .sources
            .iter()
            .filter(|s| s.role == SourceRole::Target)
            .count();
        if targets != 1 {
            return Err(Error::InvalidArgument(format!(
                "scene needs exactly one target, found {targets}"
            )));
        }
        let noises = self
            .sources
            .iter()
            .filter(|s| s.role == SourceRole::Noise)
            .count();
        if noises > 0 && noises < 3 {
            return Err(Error::InvalidArgument(format!(
                "when noise is enabled at least 3 directional noises are required, found {noises}"
            )));
        }
        for (i, s) in self.sources.iter().enumerate() {
            if !self.room.contains(self.source_room_position(i)?) {
                return Err(Error::Geometry(format!(
                    "source {i} ({}) falls outside the room",
                    s.region_id
                )));
            }
        }
        Ok(())
    }

    /// Room-frame Cartesian position of source `i`.
    pub fn source_room_position(&self, i: usize) -> Result<[f64; 3]> {
        let s = self.sources.get(i).ok_or(Error::Index {
            index: i,
            len: self.sources.len(),
        })?;
        let p = s.location.to_cartesian();
        Ok([
            self.array_origin[0] + p[0],
            self.array_origin[1] + p[1],
            self.array_origin[2] + p[2],
        ])
    }

    /// Room-frame position of microphone `m`.
    pub fn mic_room_position(&self, m: usize) -> Result<[f64; 3]> {
        let p = self.array.position(m)?;
        Ok([
            self.array_origin[0] + p[0],
            self.array_origin[1] + p[1],
            self.array_origin[2] + p[2],
        ])
    }

    pub fn target_index(&self) -> Option<usize> {
        self.sources.iter().position(|s| s.role == SourceRole::Target)
    }
}

/// Rendered scene: per-source multichannel reverberant images and their sum.
#[derive(Debug, Clone)]
pub struct RenderedScene {
    /// stems[source][channel][sample], already scaled for mixing.
    pub stems: Vec<Vec<Vec<f64>>>,
    /// mixture[channel][sample] = Σ stems, same accumulation order.
    pub mixture: Vec<Vec<f64>>,
    /// Gains applied to each source before summation.
    pub gains: Vec<f64>,
}

fn next_pow2(n: usize) -> usize {
    let mut p = 1;
    while p < n {
        p <<= 1;
    }
    p
}

/// Linear convolution via FFT, output length len(x) + len(h) − 1.
pub fn convolve(x: &[f64], h: &[f64]) -> Vec<f64> {
    let out_len = x.len() + h.len() - 1;
    let n = next_pow2(out_len);
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let mut a = vec![Complex64::new(0.0, 0.0); n];
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    for (i, &v) in x.iter().enumerate() {
        a[i].re = v;
    }
    for (i, &v) in h.iter().enumerate() {
        b[i].re = v;
    }
    fft.process(&mut a);
    fft.process(&mut b);
    for (u, v) in a.iter_mut().zip(&b) {
        *u *= v;
    }
    ifft.process(&mut a);
    a[..out_len].iter().map(|v| v.re / n as f64).collect()
}

fn power(stem: &[Vec<f64>]) -> f64 {
    let count: usize = stem.iter().map(|ch| ch.len()).sum();
    if count == 0 {
        return 0.0;
    }
    stem.iter()
        .flat_map(|ch| ch.iter())
        .map(|&x| x * x)
        .sum::<f64>()
        / count as f64
}

/// Renders a scene: convolves each source signal with its per-mic RIR,
/// scales interferers and noises to the requested SIR/SNR against the
/// target's reverberant power, and sums the stems into the mixture.
pub fn render_scene(spec: &SceneSpec, signals: &[Vec<f64>]) -> Result<RenderedScene> {
    spec.validate()?;
    if signals.len() != spec.sources.len() {
        return Err(Error::Shape(format!(
            "{} signals for {} sources",
            signals.len(),
            spec.sources.len()
        )));
    }
    let m = spec.array.num_mics();
    let n_samples = signals.iter().map(|s| s.len()).max().unwrap_or(0);
    if n_samples == 0 {
        return Err(Error::InvalidArgument("all source signals empty".into()));
    }

    // reverberant stems at unit gain
    let mut raw: Vec<Vec<Vec<f64>>> = Vec::with_capacity(spec.sources.len());
    for (i, sig) in signals.iter().enumerate() {
        let src = spec.source_room_position(i)?;
        let mut stem = Vec::with_capacity(m);
        for mic in 0..m {
            let rir = simulate_rir(&spec.room, src, spec.mic_room_position(mic)?, spec.fs, spec.c)?;
            let mut y = convolve(sig, &rir);
            y.truncate(n_samples);
            y.resize(n_samples, 0.0);
            stem.push(y);
        }
        raw.push(stem);
    }

    let target = spec
        .target_index()
        .ok_or_else(|| Error::InvalidArgument("no target source".into()))?;
    let p_target = power(&raw[target]);
    if p_target <= 0.0 {
        return Err(Error::DegenerateScene("target stem is silent".into()));
    }

    let group_power = |role: SourceRole| -> f64 {
        spec.sources
            .iter()
            .enumerate()
            .filter(|(_, s)| s.role == role)
            .map(|(i, _)| power(&raw[i]))
            .sum()
    };
    let p_interf = group_power(SourceRole::Interferer);
    let p_noise = group_power(SourceRole::Noise);
    let interf_gain = if p_interf > 0.0 {
        (p_target / (p_interf * 10f64.powf(spec.sir_db / 10.0))).sqrt()
    } else {
        0.0
    };
    let noise_gain = if p_noise > 0.0 {
        (p_target / (p_noise * 10f64.powf(spec.snr_db / 10.0))).sqrt()
    } else {
        0.0
    };

    let mut gains = Vec::with_capacity(spec.sources.len());
    let mut stems = raw;
    for (i, s) in spec.sources.iter().enumerate() {
        let g = match s.role {
            SourceRole::Target => 1.0,
            SourceRole::Interferer => interf_gain,
            SourceRole::Noise => noise_gain,
        };
        gains.push(g);
        if g != 1.0 {
            for ch in &mut stems[i] {
                for x in ch.iter_mut() {
                    *x *= g;
                }
            }
        }
    }

    let mut mixture = vec![vec![0.0f64; n_samples]; m];
    for stem in &stems {
        for (ch, acc) in stem.iter().zip(mixture.iter_mut()) {
            for (x, a) in ch.iter().zip(acc.iter_mut()) {
                *a += x;
            }
        }
    }
    Ok(RenderedScene {
        stems,
        mixture,
        gains,
    })
}
