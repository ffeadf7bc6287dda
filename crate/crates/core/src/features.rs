//! T-F features: log power spectra, observed and theoretical interaural
//! phase differences, the 3D spatial feature, the attention posterior over
//! region candidates, and the 3D region feature.

use std::f64::consts::{PI, TAU};
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{pure_delay, Location3D, MicArray};
use crate::spectral::Spectrogram;

pub const LPS_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Lps,
    Ipd,
    Sf,
    Rf,
    Mask,
}

/// Real-valued T-F map. `bound` records the symmetric value bound for
/// SF/RF maps (the number of microphone pairs P); it is 1 otherwise.
#[derive(Debug, Clone)]
pub struct FeatureMap {
    data: Vec<f64>,
    frames: usize,
    bins: usize,
    pub kind: FeatureKind,
    pub bound: f64,
}

impl FeatureMap {
    pub fn new(frames: usize, bins: usize, kind: FeatureKind, bound: f64) -> Self {
        Self {
            data: vec![0.0; frames * bins],
            frames,
            bins,
            kind,
            bound,
        }
    }

    pub fn num_frames(&self) -> usize {
        self.frames
    }

    pub fn num_bins(&self) -> usize {
        self.bins
    }

    #[inline]
    pub fn at(&self, t: usize, f: usize) -> f64 {
        self.data[t * self.bins + f]
    }

    #[inline]
    pub fn at_mut(&mut self, t: usize, f: usize) -> &mut f64 {
        &mut self.data[t * self.bins + f]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    fn same_shape(&self, other: &FeatureMap) -> bool {
        self.frames == other.frames && self.bins == other.bins
    }
}

/// Wraps an angle to (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let mut a = x % TAU;
    if a > PI {
        a -= TAU;
    } else if a <= -PI {
        a += TAU;
    }
    a
}

/// Logarithm power spectrum of one channel: ln(|Y|² + ε).
pub fn lps(spec: &Spectrogram, ref_channel: usize) -> Result<FeatureMap> {
    if ref_channel >= spec.num_channels() {
        return Err(Error::Index {
            index: ref_channel,
            len: spec.num_channels(),
        });
    }
    let mut out = FeatureMap::new(spec.num_frames(), spec.num_bins(), FeatureKind::Lps, 1.0);
    for t in 0..spec.num_frames() {
        for f in 0..spec.num_bins() {
            *out.at_mut(t, f) = (spec.at(t, f, ref_channel).norm_sqr() + LPS_EPS).ln();
        }
    }
    Ok(out)
}

/// Observed interaural phase difference of a mic pair, wrapped to (−π, π].
pub fn ipd(spec: &Spectrogram, array: &MicArray, pair_index: usize) -> Result<FeatureMap> {
    let (p1, p2) = array.pair(pair_index)?;
    if p1 >= spec.num_channels() || p2 >= spec.num_channels() {
        return Err(Error::Shape(format!(
            "pair ({p1}, {p2}) exceeds {} channels",
            spec.num_channels()
        )));
    }
    let mut out = FeatureMap::new(spec.num_frames(), spec.num_bins(), FeatureKind::Ipd, 1.0);
    for t in 0..spec.num_frames() {
        for f in 0..spec.num_bins() {
            let d = spec.at(t, f, p1).arg() - spec.at(t, f, p2).arg();
            *out.at_mut(t, f) = wrap_phase(d);
        }
    }
    Ok(out)
}

/// Theoretical phase difference per bin for a hypothesized location:
/// TPD_f = 2π·(f/n_fft)·τ with τ the pure delay in samples.
pub fn tpd(
    loc: &Location3D,
    array: &MicArray,
    pair_index: usize,
    n_fft: usize,
    fs: f64,
    c: f64,
) -> Result<Vec<f64>> {
    let tau = pure_delay(loc, array, pair_index, fs, c)?;
    let bins = n_fft / 2 + 1;
    Ok((0..bins)
        .map(|f| TAU * (f as f64 / n_fft as f64) * tau)
        .collect())
}

/// 3D spatial feature: Σ_p cos(IPD − TPD(loc)), in [−P, P].
pub fn spatial_feature(
    spec: &Spectrogram,
    loc: &Location3D,
    array: &MicArray,
    c: f64,
) -> Result<FeatureMap> {
    let pairs = array.pairs().len();
    if pairs == 0 {
        return Err(Error::InvalidArgument("array has no mic pairs".into()));
    }
    let mut out = FeatureMap::new(
        spec.num_frames(),
        spec.num_bins(),
        FeatureKind::Sf,
        pairs as f64,
    );
    for p in 0..pairs {
        let obs = ipd(spec, array, p)?;
        let theo = tpd(loc, array, p, spec.n_fft, spec.fs, c)?;
        for t in 0..spec.num_frames() {
            for f in 0..spec.num_bins() {
                *out.at_mut(t, f) += (obs.at(t, f) - theo[f]).cos();
            }
        }
    }
    Ok(out)
}

/// Attention-module weights: input L·F → hidden H → L candidates.
#[derive(Debug, Clone)]
pub struct PosteriorWeights {
    /// Hidden layer, H rows of L·F values (row-major).
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// Output layer, L rows of H values.
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub num_candidates: usize,
    pub num_bins: usize,
    pub hidden: usize,
}

pub const WEIGHTS_MAGIC: &[u8; 4] = b"BW3D";

impl PosteriorWeights {
    pub fn new(
        w1: Vec<f64>,
        b1: Vec<f64>,
        w2: Vec<f64>,
        b2: Vec<f64>,
        num_candidates: usize,
        num_bins: usize,
        hidden: usize,
    ) -> Result<Self> {
        let (l, f, h) = (num_candidates, num_bins, hidden);
        if w1.len() != h * l * f || b1.len() != h || w2.len() != l * h || b2.len() != l {
            return Err(Error::Shape(format!(
                "weight sizes inconsistent with L={l}, F={f}, H={h}"
            )));
        }
        for v in w1.iter().chain(&b1).chain(&w2).chain(&b2) {
            if !v.is_finite() {
                return Err(Error::InvalidArgument("non-finite weight value".into()));
            }
        }
        Ok(Self {
            w1,
            b1,
            w2,
            b2,
            num_candidates,
            num_bins,
            hidden,
        })
    }

    /// Reads the binary weight format: 16-byte header (magic "BW3D",
    /// u32 L, u32 F, u32 H, little-endian) followed by row-major f32
    /// matrices w1 [H × L·F], b1 [H], w2 [L × H], b2 [L].
    pub fn read_from(path: &Path) -> Result<Self> {
        let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut header = [0u8; 16];
        file.read_exact(&mut header)
            .map_err(|e| Error::io(path, e))?;
        if &header[0..4] != WEIGHTS_MAGIC {
            return Err(Error::file(path, "bad magic, expected BW3D"));
        }
        let l = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        let f = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let h = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
        let count = h * l * f + h + l * h + l;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
        if bytes.len() != count * 4 {
            return Err(Error::file(
                path,
                format!("expected {} payload bytes, found {}", count * 4, bytes.len()),
            ));
        }
        let mut vals = Vec::with_capacity(count);
        for chunk in bytes.chunks_exact(4) {
            vals.push(f32::from_le_bytes(chunk.try_into().unwrap()) as f64);
        }
        let mut it = vals.into_iter();
        let take = |it: &mut std::vec::IntoIter<f64>, n: usize| -> Vec<f64> {
            it.by_ref().take(n).collect()
        };
        let w1 = take(&mut it, h * l * f);
        let b1 = take(&mut it, h);
        let w2 = take(&mut it, l * h);
        let b2 = take(&mut it, l);
        Self::new(w1, b1, w2, b2, l, f, h)
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut header = Vec::with_capacity(16);
        header.extend_from_slice(WEIGHTS_MAGIC);
        header.extend_from_slice(&(self.num_candidates as u32).to_le_bytes());
        header.extend_from_slice(&(self.num_bins as u32).to_le_bytes());
        header.extend_from_slice(&(self.hidden as u32).to_le_bytes());
        file.write_all(&header).map_err(|e| Error::io(path, e))?;
        for v in self.w1.iter().chain(&self.b1).chain(&self.w2).chain(&self.b2) {
            file.write_all(&(*v as f32).to_le_bytes())
                .map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

/// How the posterior over region candidates is computed.
#[derive(Debug, Clone)]
pub enum PosteriorMode {
    Uniform,
    /// Softmax over β·(T-F mean of each candidate's SF map).
    Heuristic { beta: f64 },
    /// Two-layer forward pass per frame, softmax, then frame average.
    Mlp(PosteriorWeights),
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|&e| e / sum).collect()
}

/// Posterior distribution over the L candidate locations given their SF maps.
pub fn attention_posterior(sf_stack: &[FeatureMap], mode: &PosteriorMode) -> Result<Vec<f64>> {
    let l = sf_stack.len();
    if l == 0 {
        return Err(Error::InvalidArgument("empty candidate stack".into()));
    }
    for m in &sf_stack[1..] {
        if !m.same_shape(&sf_stack[0]) {
            return Err(Error::Shape("candidate SF maps differ in shape".into()));
        }
    }
    match mode {
        PosteriorMode::Uniform => Ok(vec![1.0 / l as f64; l]),
        PosteriorMode::Heuristic { beta } => {
            let logits: Vec<f64> = sf_stack.iter().map(|m| beta * m.mean()).collect();
            Ok(softmax(&logits))
        }
        PosteriorMode::Mlp(w) => {
            let frames = sf_stack[0].num_frames();
            let bins = sf_stack[0].num_bins();
            if w.num_candidates != l || w.num_bins != bins {
                return Err(Error::Shape(format!(
                    "weights expect L={} F={}, got L={l} F={bins}",
                    w.num_candidates, w.num_bins
                )));
            }
            let h = w.hidden;
            let input_dim = l * bins;
            let mut acc = vec![0.0f64; l];
            let mut hidden = vec![0.0f64; h];
            let mut logits = vec![0.0f64; l];
            for t in 0..frames {
                for j in 0..h {
                    let row = &w.w1[j * input_dim..(j + 1) * input_dim];
                    let mut s = w.b1[j];
                    for (i, m) in sf_stack.iter().enumerate() {
                        let base = i * bins;
                        for f in 0..bins {
                            s += row[base + f] * m.at(t, f);
                        }
                    }
                    hidden[j] = s.tanh();
                }
                for (i, logit) in logits.iter_mut().enumerate() {
                    let row = &w.w2[i * h..(i + 1) * h];
                    *logit = w.b2[i] + row.iter().zip(&hidden).map(|(a, b)| a * b).sum::<f64>();
                }
                for (a, p) in acc.iter_mut().zip(softmax(&logits)) {
                    *a += p / frames as f64;
                }
            }
            let sum: f64 = acc.iter().sum();
            Ok(acc.iter().map(|&p| p / sum).collect())
        }
    }
}

/// Region feature: posterior-weighted mixture of the candidate SF maps.
pub fn region_feature(sf_stack: &[FeatureMap], posterior: &[f64]) -> Result<FeatureMap> {
    if sf_stack.len() != posterior.len() {
        return Err(Error::Shape(format!(
            "{} SF maps but {} posterior entries",
            sf_stack.len(),
            posterior.len()
        )));
    }
    if sf_stack.is_empty() {
        return Err(Error::InvalidArgument("empty candidate stack".into()));
    }
    let sum: f64 = posterior.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "posterior sums to {sum}, expected 1"
        )));
    }
    let frames = sf_stack[0].num_frames();
    let bins = sf_stack[0].num_bins();
    let mut out = FeatureMap::new(frames, bins, FeatureKind::Rf, sf_stack[0].bound);
    for (m, &p) in sf_stack.iter().zip(posterior) {
        if !m.same_shape(&sf_stack[0]) {
            return Err(Error::Shape("candidate SF maps differ in shape".into()));
        }
        for t in 0..frames {
            for f in 0..bins {
                *out.at_mut(t, f) += p * m.at(t, f);
            }
        }
    }
    Ok(out)
}

/// Affine map of a match-degree feature to a [0, 1] mask:
/// M = clamp((f/P + 1)/2, 0, 1).
pub fn feature_mask(f: &FeatureMap) -> Result<FeatureMap> {
    if f.kind != FeatureKind::Sf && f.kind != FeatureKind::Rf {
        return Err(Error::InvalidArgument(format!(
            "feature_mask needs an SF or RF map, got {:?}",
            f.kind
        )));
    }
    let p = f.bound;
    let mut out = FeatureMap::new(f.num_frames(), f.num_bins(), FeatureKind::Mask, 1.0);
    for t in 0..f.num_frames() {
        for b in 0..f.num_bins() {
            *out.at_mut(t, b) = ((f.at(t, b) / p + 1.0) / 2.0).clamp(0.0, 1.0);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Spectrogram;
    use num_complex::Complex64;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn const_spec(frames: usize, bins: usize, vals: &[Complex64]) -> Spectrogram {
        let mut s = Spectrogram::zeros(frames, bins, vals.len(), 16000.0, (bins - 1) * 2, bins - 1);
        for t in 0..frames {
            for f in 0..bins {
                for (m, v) in vals.iter().enumerate() {
                    *s.at_mut(t, f, m) = *v;
                }
            }
        }
        s
    }

    #[test]
    fn lps_values() {
        let z = const_spec(3, 5, &[Complex64::new(0.0, 0.0)]);
        let m = lps(&z, 0).unwrap();
        assert!((m.at(0, 0) - LPS_EPS.ln()).abs() < 1e-12);

        let one = const_spec(3, 5, &[Complex64::new(1.0, 0.0)]);
        assert!(lps(&one, 0).unwrap().at(1, 2).abs() < 1e-9);

        let ten = const_spec(1, 1, &[Complex64::new(0.0, 10.0)]);
        assert!((lps(&ten, 0).unwrap().at(0, 0) - 100f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn ipd_basics() {
        let arr = MicArray::dual_default();
        let a = Complex64::new(0.3, 0.4);
        let same = const_spec(2, 4, &[a, a]);
        assert!(ipd(&same, &arr, 0).unwrap().values().iter().all(|v| v.abs() < 1e-12));

        let rot = a * Complex64::from_polar(1.0, -PI / 3.0);
        let shifted = const_spec(2, 4, &[a, rot]);
        let m = ipd(&shifted, &arr, 0).unwrap();
        assert!((m.at(0, 0) - PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ipd_wraps() {
        let arr = MicArray::dual_default();
        let s = const_spec(
            1,
            1,
            &[Complex64::from_polar(1.0, 3.0), Complex64::from_polar(1.0, -3.0)],
        );
        let m = ipd(&s, &arr, 0).unwrap();
        assert!((m.at(0, 0) - (6.0 - TAU)).abs() < 1e-12);
    }

    #[test]
    fn tpd_values() {
        let arr = MicArray::dual_default();
        let broadside = Location3D::new(PI / 2.0, 0.0, 1.0).unwrap();
        let v = tpd(&broadside, &arr, 0, 512, 16000.0, 343.0).unwrap();
        assert_eq!(v.len(), 257);
        assert!(v.iter().all(|x| x.abs() < 1e-9));

        let endfire = Location3D::new(0.0, 0.0, 1.0).unwrap();
        let v = tpd(&endfire, &arr, 0, 512, 16000.0, 343.0).unwrap();
        assert!(v[0].abs() < 1e-12);
        let tau = pure_delay(&endfire, &arr, 0, 16000.0, 343.0).unwrap();
        assert!((v[256] - PI * tau).abs() < 1e-9);
        assert!((v[256] + 17.2926).abs() < 1e-3, "got {}", v[256]);
    }

    #[test]
    fn sf_exact_match_and_antimatch() {
        let arr = MicArray::dual_default();
        let loc = Location3D::new(0.4, 0.1, 0.8).unwrap();
        let theo = tpd(&loc, &arr, 0, 512, 16000.0, 343.0).unwrap();
        let mut spec = Spectrogram::zeros(3, 257, 2, 16000.0, 512, 256);
        for t in 0..3 {
            for f in 0..257 {
                let y1 = Complex64::new(0.5, -0.2);
                *spec.at_mut(t, f, 0) = y1;
                *spec.at_mut(t, f, 1) = y1 * Complex64::from_polar(1.0, -theo[f]);
            }
        }
        let sf = spatial_feature(&spec, &loc, &arr, 343.0).unwrap();
        assert!(sf.values().iter().all(|&v| (v - 1.0).abs() < 1e-9));

        // offset every IPD by π
        for t in 0..3 {
            for f in 0..257 {
                *spec.at_mut(t, f, 1) *= Complex64::from_polar(1.0, PI);
            }
        }
        let sf = spatial_feature(&spec, &loc, &arr, 343.0).unwrap();
        assert!(sf.values().iter().all(|&v| (v + 1.0).abs() < 1e-9));
    }

    #[test]
    fn sf_scale_invariant() {
        let arr = MicArray::dual_default();
        let loc = Location3D::new(1.0, 0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut spec = Spectrogram::zeros(4, 257, 2, 16000.0, 512, 256);
        for t in 0..4 {
            for f in 0..257 {
                for m in 0..2 {
                    *spec.at_mut(t, f, m) =
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
        }
        let a = spatial_feature(&spec, &loc, &arr, 343.0).unwrap();
        let b = spatial_feature(&spec.scaled(3.7), &loc, &arr, 343.0).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            // arg() of a scaled complex number can differ in the last ulp
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn posterior_uniform_and_heuristic() {
        let maps: Vec<FeatureMap> = (0..9).map(|_| FeatureMap::new(2, 3, FeatureKind::Sf, 1.0)).collect();
        let p = attention_posterior(&maps, &PosteriorMode::Uniform).unwrap();
        assert!(p.iter().all(|&x| (x - 1.0 / 9.0).abs() < 1e-12));

        let p = attention_posterior(&maps, &PosteriorMode::Heuristic { beta: 0.0 }).unwrap();
        assert!(p.iter().all(|&x| (x - 1.0 / 9.0).abs() < 1e-12));
    }

    #[test]
    fn posterior_heuristic_matches_scalar_softmax() {
        let means = [0.9, 0.2, 0.2, 0.1];
        let maps: Vec<FeatureMap> = means
            .iter()
            .map(|&v| {
                let mut m = FeatureMap::new(2, 3, FeatureKind::Sf, 1.0);
                for t in 0..2 {
                    for f in 0..3 {
                        *m.at_mut(t, f) = v;
                    }
                }
                m
            })
            .collect();
        let beta = 5.0;
        let p = attention_posterior(&maps, &PosteriorMode::Heuristic { beta }).unwrap();
        // scalar softmax oracle
        let exps: Vec<f64> = means.iter().map(|&m| (beta * m).exp()).collect();
        let z: f64 = exps.iter().sum();
        for (got, e) in p.iter().zip(&exps) {
            assert!((got - e / z).abs() < 1e-12);
        }
        assert_eq!(
            p.iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0,
            0
        );
    }

    #[test]
    fn posterior_mlp_normalized_and_file_round_trip() {
        let (l, bins, h) = (3, 4, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let w = PosteriorWeights::new(
            (0..h * l * bins).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            (0..h).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            (0..l * h).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            (0..l).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            l,
            bins,
            h,
        )
        .unwrap();
        let maps: Vec<FeatureMap> = (0..l)
            .map(|i| {
                let mut m = FeatureMap::new(6, bins, FeatureKind::Sf, 1.0);
                for t in 0..6 {
                    for f in 0..bins {
                        *m.at_mut(t, f) = ((i + t + f) as f64 * 0.37).sin();
                    }
                }
                m
            })
            .collect();
        let p = attention_posterior(&maps, &PosteriorMode::Mlp(w.clone())).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(p.iter().all(|&x| x >= 0.0));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.bw3d");
        w.write_to(&path).unwrap();
        let w2 = PosteriorWeights::read_from(&path).unwrap();
        let p2 = attention_posterior(&maps, &PosteriorMode::Mlp(w2)).unwrap();
        // f32 storage rounds the weights
        for (a, b) in p.iter().zip(&p2) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn weights_bad_magic_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.bw3d");
        std::fs::write(&path, b"NOPE0123456789ab").unwrap();
        assert!(PosteriorWeights::read_from(&path).is_err());
    }

    #[test]
    fn region_feature_mixing() {
        let mk = |v: f64| {
            let mut m = FeatureMap::new(1, 2, FeatureKind::Sf, 1.0);
            *m.at_mut(0, 0) = v;
            *m.at_mut(0, 1) = v;
            m
        };
        let maps = vec![mk(1.0), mk(-1.0), mk(0.5)];

        // one-hot picks a single map
        let rf = region_feature(&maps, &[0.0, 0.0, 1.0]).unwrap();
        assert!((rf.at(0, 0) - 0.5).abs() < 1e-12);

        // uniform is the elementwise mean
        let rf = region_feature(&maps, &[1.0 / 3.0; 3]).unwrap();
        assert!((rf.at(0, 1) - 0.5 / 3.0).abs() < 1e-12);

        // convexity cancellation
        let rf = region_feature(&maps[..2].to_vec(), &[0.5, 0.5]).unwrap();
        assert!(rf.at(0, 0).abs() < 1e-12);

        assert!(region_feature(&maps, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn feature_mask_affine() {
        let mut m = FeatureMap::new(1, 3, FeatureKind::Sf, 1.0);
        *m.at_mut(0, 0) = 1.0;
        *m.at_mut(0, 1) = -1.0;
        *m.at_mut(0, 2) = 0.0;
        let mask = feature_mask(&m).unwrap();
        assert_eq!(mask.at(0, 0), 1.0);
        assert_eq!(mask.at(0, 1), 0.0);
        assert_eq!(mask.at(0, 2), 0.5);

        let lps_map = FeatureMap::new(1, 3, FeatureKind::Lps, 1.0);
        assert!(feature_mask(&lps_map).is_err());
    }
}
