//! Mask-weighted spatial covariance matrices, oracle masks, closed-form
//! MVDR/MCWF beamforming, beamformer application, and 3D beampatterns.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeatureMap};
use crate::geometry::{mic_delay_samples, Location3D, MicArray};
use crate::spectral::Spectrogram;

const MASK_EPS: f64 = 1e-8;
const LOADING_FACTOR: f64 = 1e-6;

/// Spatial covariance matrices, per frequency (utterance) or per T-F bin.
#[derive(Debug, Clone)]
pub enum Scm {
    /// One M×M matrix per frequency bin.
    Utterance(Vec<DMatrix<Complex64>>),
    /// One rank-≤1 M×M matrix per (frame, bin).
    Framewise(Vec<Vec<DMatrix<Complex64>>>),
}

impl Scm {
    pub fn per_frequency(&self) -> Result<&[DMatrix<Complex64>]> {
        match self {
            Scm::Utterance(m) => Ok(m),
            Scm::Framewise(_) => Err(Error::InvalidArgument(
                "per-frequency SCMs required, got framewise".into(),
            )),
        }
    }
}

/// Beamforming coefficients: one complex M-vector per frequency, optionally
/// per frame.
#[derive(Debug, Clone)]
pub struct BeamWeights {
    /// weights[f][m] (utterance) or framewise[t][f][m].
    pub per_freq: Vec<Vec<Complex64>>,
    pub ref_channel: usize,
}

impl BeamWeights {
    pub fn num_bins(&self) -> usize {
        self.per_freq.len()
    }

    pub fn num_channels(&self) -> usize {
        self.per_freq.first().map_or(0, |w| w.len())
    }

    /// Selector weights e_ref: passes the reference channel through.
    pub fn selector(bins: usize, channels: usize, ref_channel: usize) -> Self {
        let mut w = vec![vec![Complex64::new(0.0, 0.0); channels]; bins];
        for row in &mut w {
            row[ref_channel] = Complex64::new(1.0, 0.0);
        }
        Self {
            per_freq: w,
            ref_channel,
        }
    }
}

/// Ideal ratio mask of the target against competing stems:
/// M^S = |S| / (|S| + Σ|others| + ε), magnitudes at `ref_channel`.
pub fn oracle_irm(
    target: &Spectrogram,
    others: &[&Spectrogram],
    ref_channel: usize,
) -> Result<FeatureMap> {
    let (frames, bins) = (target.num_frames(), target.num_bins());
    for o in others {
        if o.num_frames() != frames || o.num_bins() != bins {
            return Err(Error::Shape("stem spectrograms differ in shape".into()));
        }
    }
    let mut mask = FeatureMap::new(frames, bins, FeatureKind::Mask, 1.0);
    for t in 0..frames {
        for f in 0..bins {
            let s = target.at(t, f, ref_channel).norm();
            let n: f64 = others.iter().map(|o| o.at(t, f, ref_channel).norm()).sum();
            *mask.at_mut(t, f) = s / (s + n + MASK_EPS);
        }
    }
    Ok(mask)
}

/// Complement mask 1 − M.
pub fn complement_mask(mask: &FeatureMap) -> Result<FeatureMap> {
    if mask.kind != FeatureKind::Mask {
        return Err(Error::InvalidArgument("expected a mask".into()));
    }
    let mut out = FeatureMap::new(mask.num_frames(), mask.num_bins(), FeatureKind::Mask, 1.0);
    for t in 0..mask.num_frames() {
        for f in 0..mask.num_bins() {
            *out.at_mut(t, f) = 1.0 - mask.at(t, f);
        }
    }
    Ok(out)
}

fn check_mask(spec: &Spectrogram, mask: &FeatureMap) -> Result<()> {
    if mask.num_frames() != spec.num_frames() || mask.num_bins() != spec.num_bins() {
        return Err(Error::Shape(format!(
            "mask {}×{} vs spectrogram {}×{}",
            mask.num_frames(),
            mask.num_bins(),
            spec.num_frames(),
            spec.num_bins()
        )));
    }
    Ok(())
}

fn outer(v: &[Complex64]) -> DMatrix<Complex64> {
    let m = v.len();
    DMatrix::from_fn(m, m, |i, j| v[i] * v[j].conj())
}

/// Per-bin rank-1 SCMs of the masked spectrogram: Φ_{t,f} = (M∘Y)(M∘Y)^H.
pub fn masked_scm_framewise(spec: &Spectrogram, mask: &FeatureMap) -> Result<Scm> {
    check_mask(spec, mask)?;
    let mut out = Vec::with_capacity(spec.num_frames());
    for t in 0..spec.num_frames() {
        let mut row = Vec::with_capacity(spec.num_bins());
        for f in 0..spec.num_bins() {
            let v: Vec<Complex64> = spec
                .vector_at(t, f)
                .iter()
                .map(|y| y * mask.at(t, f))
                .collect();
            row.push(outer(&v));
        }
        out.push(row);
    }
    Ok(Scm::Framewise(out))
}

/// Time-averaged per-frequency SCMs with squared-mask weighting:
/// Φ_f = Σ_t M² Y Y^H / (Σ_t M² + ε).
pub fn masked_scm_utterance(spec: &Spectrogram, mask: &FeatureMap) -> Result<Scm> {
    check_mask(spec, mask)?;
    let m = spec.num_channels();
    let mut out = Vec::with_capacity(spec.num_bins());
    for f in 0..spec.num_bins() {
        let mut acc = DMatrix::<Complex64>::zeros(m, m);
        let mut wsum = 0.0;
        for t in 0..spec.num_frames() {
            let w = mask.at(t, f) * mask.at(t, f);
            if w == 0.0 {
                continue;
            }
            let y = spec.vector_at(t, f);
            for i in 0..m {
                for j in 0..m {
                    acc[(i, j)] += y[i] * y[j].conj() * w;
                }
            }
            wsum += w;
        }
        out.push(acc / Complex64::new(wsum + MASK_EPS, 0.0));
    }
    Ok(Scm::Utterance(out))
}

fn loaded(phi: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let m = phi.nrows();
    let tr: f64 = (0..m).map(|i| phi[(i, i)].re).sum();
    let delta = LOADING_FACTOR * tr.max(MASK_EPS) / m as f64;
    let mut out = phi.clone();
    for i in 0..m {
        out[(i, i)] += Complex64::new(delta, 0.0);
    }
    out
}

fn invert(phi: &DMatrix<Complex64>, f: usize) -> Result<DMatrix<Complex64>> {
    loaded(phi)
        .try_inverse()
        .ok_or_else(|| Error::Numerical(format!("SCM not invertible at bin {f}")))
}

/// MVDR in the Souden trace formulation:
/// w_f = (Φ_NN + δI)^{−1} Φ_SS / tr((Φ_NN + δI)^{−1} Φ_SS) · e_ref.
pub fn mvdr_weights(scm_s: &Scm, scm_n: &Scm, ref_channel: usize) -> Result<BeamWeights> {
    let phis = scm_s.per_frequency()?;
    let phin = scm_n.per_frequency()?;
    if phis.len() != phin.len() {
        return Err(Error::Shape("SCM bin counts differ".into()));
    }
    let m = phis.first().map_or(0, |p| p.nrows());
    if ref_channel >= m {
        return Err(Error::Index {
            index: ref_channel,
            len: m,
        });
    }
    let mut per_freq = Vec::with_capacity(phis.len());
    let mut degenerate = 0usize;
    for (f, (ps, pn)) in phis.iter().zip(phin).enumerate() {
        let num = invert(pn, f)? * ps;
        let tr: Complex64 = (0..m).map(|i| num[(i, i)]).sum();
        if tr.norm() < 1e-12 {
            degenerate += 1;
            per_freq.push(vec![Complex64::new(0.0, 0.0); m]);
            continue;
        }
        per_freq.push((0..m).map(|i| num[(i, ref_channel)] / tr).collect());
    }
    if degenerate > 0 {
        log::warn!("MVDR: {degenerate} bins had vanishing target SCM; zero weights emitted");
    }
    Ok(BeamWeights {
        per_freq,
        ref_channel,
    })
}

/// Utterance multichannel Wiener filter toward a reference target
/// spectrogram: w_f = (Φ_YY + δI)^{−1} φ_YS with
/// Φ_YY = Σ_t Y Y^H / T and φ_YS = Σ_t Y S*_ref / T.
pub fn mcwf_weights(
    spec: &Spectrogram,
    target_ref: &Spectrogram,
    ref_channel: usize,
) -> Result<BeamWeights> {
    if target_ref.num_frames() != spec.num_frames() || target_ref.num_bins() != spec.num_bins() {
        return Err(Error::Shape("target reference shape mismatch".into()));
    }
    let m = spec.num_channels();
    if ref_channel >= m {
        return Err(Error::Index {
            index: ref_channel,
            len: m,
        });
    }
    let frames = spec.num_frames() as f64;
    let mut per_freq = Vec::with_capacity(spec.num_bins());
    for f in 0..spec.num_bins() {
        let mut phi_yy = DMatrix::<Complex64>::zeros(m, m);
        let mut phi_ys = vec![Complex64::new(0.0, 0.0); m];
        for t in 0..spec.num_frames() {
            let y = spec.vector_at(t, f);
            let s = target_ref.at(t, f, 0).conj();
            for i in 0..m {
                phi_ys[i] += y[i] * s / frames;
                for j in 0..m {
                    phi_yy[(i, j)] += y[i] * y[j].conj() / frames;
                }
            }
        }
        if phi_ys.iter().all(|v| v.norm() < 1e-14) {
            per_freq.push(vec![Complex64::new(0.0, 0.0); m]);
            continue;
        }
        let inv = invert(&phi_yy, f)?;
        per_freq.push((0..m).map(|i| (0..m).map(|j| inv[(i, j)] * phi_ys[j]).sum()).collect());
    }
    Ok(BeamWeights {
        per_freq,
        ref_channel,
    })
}

/// Applies Ŝ_{t,f} = w^H_f Y_{t,f}, yielding a single-channel spectrogram.
pub fn apply_beamformer(w: &BeamWeights, spec: &Spectrogram) -> Result<Spectrogram> {
    if w.num_bins() != spec.num_bins() || w.num_channels() != spec.num_channels() {
        return Err(Error::Shape(format!(
            "weights {}×{} vs spectrogram {}×{}",
            w.num_bins(),
            w.num_channels(),
            spec.num_bins(),
            spec.num_channels()
        )));
    }
    let mut out = Spectrogram::zeros(
        spec.num_frames(),
        spec.num_bins(),
        1,
        spec.fs,
        spec.n_fft,
        spec.hop,
    );
    out.orig_len = spec.orig_len;
    for t in 0..spec.num_frames() {
        for f in 0..spec.num_bins() {
            let y = spec.vector_at(t, f);
            let s: Complex64 = w.per_freq[f]
                .iter()
                .zip(y)
                .map(|(wi, yi)| wi.conj() * yi)
                .sum();
            *out.at_mut(t, f, 0) = s;
        }
    }
    Ok(out)
}

/// Near-field steering vector toward a location at one frequency bin:
/// v_m = (d_ref/d_m)·e^{+j2π(f/n_fft)(τ_m − τ_ref)} with absolute per-mic
/// delays τ in samples; the phase sign matches the e^{+jωn} analysis kernel
/// of the STFT. The far-field variant uses plane-wave delays and unit
/// amplitudes; in both cases v_ref = 1.
#[allow(clippy::too_many_arguments)]
pub fn steering_vector(
    loc: &Location3D,
    array: &MicArray,
    f_bin: usize,
    n_fft: usize,
    fs: f64,
    c: f64,
    near_field: bool,
    ref_channel: usize,
) -> Result<Vec<Complex64>> {
    let m = array.num_mics();
    if ref_channel >= m {
        return Err(Error::Index {
            index: ref_channel,
            len: m,
        });
    }
    let omega = std::f64::consts::TAU * f_bin as f64 / n_fft as f64;
    if near_field {
        let delays: Vec<f64> = (0..m)
            .map(|i| mic_delay_samples(loc, array, i, fs, c))
            .collect::<Result<_>>()?;
        let dists: Vec<f64> = delays.iter().map(|t| t * c / fs).collect();
        Ok((0..m)
            .map(|i| {
                Complex64::from_polar(
                    dists[ref_channel] / dists[i],
                    omega * (delays[i] - delays[ref_channel]),
                )
            })
            .collect())
    } else {
        // plane-wave limit: delay is the projection onto the unit direction
        let u = {
            let p = loc.to_cartesian();
            let d = loc.distance;
            [p[0] / d, p[1] / d, p[2] / d]
        };
        let delays: Vec<f64> = array
            .positions()
            .iter()
            .map(|p| -(u[0] * p[0] + u[1] * p[1] + u[2] * p[2]) * fs / c)
            .collect();
        Ok((0..m)
            .map(|i| Complex64::from_polar(1.0, omega * (delays[i] - delays[ref_channel])))
            .collect())
    }
}

/// Evaluation lattice for beampatterns.
#[derive(Debug, Clone)]
pub struct BeamGrid {
    pub azimuths: Vec<f64>,
    pub elevations: Vec<f64>,
    pub distances: Vec<f64>,
}

impl BeamGrid {
    pub fn len(&self) -> usize {
        self.azimuths.len() * self.elevations.len() * self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of (azimuth i, elevation j, distance k), distance fastest.
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.elevations.len() + j) * self.distances.len() + k
    }

    /// Grid cell whose center is nearest to a location.
    pub fn nearest_cell(&self, loc: &Location3D) -> usize {
        let closest = |vals: &[f64], x: f64| -> usize {
            vals.iter()
                .enumerate()
                .min_by(|a, b| {
                    (a.1 - x).abs().partial_cmp(&(b.1 - x).abs()).unwrap()
                })
                .map(|(i, _)| i)
                .unwrap()
        };
        // azimuth compared on the circle
        let az = self
            .azimuths
            .iter()
            .enumerate()
            .min_by(|a, b| {
                let da = angular_diff(*a.1, loc.azimuth);
                let db = angular_diff(*b.1, loc.azimuth);
                da.partial_cmp(&db).unwrap()
            })
            .map(|(i, _)| i)
            .unwrap();
        self.index(
            az,
            closest(&self.elevations, loc.elevation),
            closest(&self.distances, loc.distance),
        )
    }
}

fn angular_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// Beampattern over a 3D location grid:
/// B(l) = 10·log10(mean over bands of |w_f^H v_f(l)|²), normalized so the
/// grid maximum is 0 dB. Responses ordered by `BeamGrid::index`.
#[allow(clippy::too_many_arguments)]
pub fn beampattern(
    w: &BeamWeights,
    grid: &BeamGrid,
    bands: &[usize],
    array: &MicArray,
    n_fft: usize,
    fs: f64,
    c: f64,
    near_field: bool,
) -> Result<Vec<f64>> {
    if grid.is_empty() || bands.is_empty() {
        return Err(Error::InvalidArgument("empty beampattern grid or band set".into()));
    }
    if bands.iter().any(|&b| b >= w.num_bins()) {
        return Err(Error::Index {
            index: *bands.iter().max().unwrap(),
            len: w.num_bins(),
        });
    }
    let mut out = Vec::with_capacity(grid.len());
    for &az in &grid.azimuths {
        for &el in &grid.elevations {
            for &d in &grid.distances {
                let loc = Location3D::new(az, el, d).map_err(|e| {
                    Error::InvalidArgument(format!("bad grid cell ({az}, {el}, {d}): {e}"))
                })?;
                let mut p = 0.0;
                for &f in bands {
                    let v = steering_vector(
                        &loc,
                        array,
                        f,
                        n_fft,
                        fs,
                        c,
                        near_field,
                        w.ref_channel,
                    )?;
                    // unit-norm probes, so near-field amplitude factors do not
                    // skew the comparison across cells
                    let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                    let resp: Complex64 = w.per_freq[f]
                        .iter()
                        .zip(&v)
                        .map(|(wi, vi)| wi.conj() * vi / norm)
                        .sum();
                    p += resp.norm_sqr();
                }
                out.push(10.0 * (p / bands.len() as f64).max(1e-300).log10());
            }
        }
    }
    let max = out.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for v in &mut out {
        *v -= max;
    }
    Ok(out)
}
