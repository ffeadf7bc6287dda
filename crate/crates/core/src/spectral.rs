//! Short-time Fourier analysis and synthesis.
//!
//! 32 ms square-root Hann window with 16 ms hop at 16 kHz (n_fft = 512,
//! hop = 256, F = 257). Analysis and synthesis use the same window; the
//! overlap-add output is normalized by the per-sample window-square sum,
//! which makes the round trip exact including the edge frames.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub const DEFAULT_N_FFT: usize = 512;
pub const DEFAULT_HOP: usize = 256;

/// Multichannel complex spectrogram, one-sided, indexed [frame][bin][channel].
#[derive(Debug, Clone)]
pub struct Spectrogram {
    data: Vec<Complex64>,
    frames: usize,
    bins: usize,
    channels: usize,
    pub fs: f64,
    pub n_fft: usize,
    pub hop: usize,
    /// Original signal length, kept so the inverse transform can trim.
    pub orig_len: Option<usize>,
}

impl Spectrogram {
    pub fn zeros(frames: usize, bins: usize, channels: usize, fs: f64, n_fft: usize, hop: usize) -> Self {
        Self {
            data: vec![Complex64::new(0.0, 0.0); frames * bins * channels],
            frames,
            bins,
            channels,
            fs,
            n_fft,
            hop,
            orig_len: None,
        }
    }

    pub fn num_frames(&self) -> usize {
        self.frames
    }

    pub fn num_bins(&self) -> usize {
        self.bins
    }

    pub fn num_channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn at(&self, t: usize, f: usize, m: usize) -> Complex64 {
        self.data[(t * self.bins + f) * self.channels + m]
    }

    #[inline]
    pub fn at_mut(&mut self, t: usize, f: usize, m: usize) -> &mut Complex64 {
        &mut self.data[(t * self.bins + f) * self.channels + m]
    }

    /// All channel values at one T-F bin.
    pub fn vector_at(&self, t: usize, f: usize) -> &[Complex64] {
        let base = (t * self.bins + f) * self.channels;
        &self.data[base..base + self.channels]
    }

    /// Extracts a single channel as a new 1-channel spectrogram.
    pub fn channel(&self, m: usize) -> Result<Spectrogram> {
        if m >= self.channels {
            return Err(Error::Index {
                index: m,
                len: self.channels,
            });
        }
        let mut out = Spectrogram::zeros(self.frames, self.bins, 1, self.fs, self.n_fft, self.hop);
        out.orig_len = self.orig_len;
        for t in 0..self.frames {
            for f in 0..self.bins {
                *out.at_mut(t, f, 0) = self.at(t, f, m);
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, alpha: f64) -> Spectrogram {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= alpha;
        }
        out
    }
}

/// Square-root Hann analysis/synthesis window, sampled at half-integer
/// points so no frame sample carries zero weight: w[n] = sin(π(n+1/2)/N).
/// Satisfies w²[n] + w²[n + N/2] = 1 exactly.
pub fn sqrt_hann(n_fft: usize) -> Vec<f64> {
    (0..n_fft)
        .map(|n| (std::f64::consts::PI * (n as f64 + 0.5) / n_fft as f64).sin())
        .collect()
}

fn frame_starts(len: usize, n_fft: usize, hop: usize) -> Vec<usize> {
    let mut starts: Vec<usize> = (0..=(len - n_fft)).step_by(hop).collect();
    let last = *starts.last().unwrap();
    if last + n_fft < len {
        // zero-padded tail frame covering the remainder
        starts.push(last + hop);
    }
    starts
}

/// Forward STFT of a multichannel signal (one Vec per channel).
pub fn stft(signal: &[Vec<f64>], n_fft: usize, hop: usize, fs: f64) -> Result<Spectrogram> {
    if signal.is_empty() {
        return Err(Error::InvalidArgument("no channels".into()));
    }
    let len = signal[0].len();
    if signal.iter().any(|ch| ch.len() != len) {
        return Err(Error::Shape("channels have different lengths".into()));
    }
    if len < n_fft {
        return Err(Error::Shape(format!(
            "signal length {len} shorter than one window ({n_fft})"
        )));
    }
    let starts = frame_starts(len, n_fft, hop);
    let bins = n_fft / 2 + 1;
    let channels = signal.len();
    let window = sqrt_hann(n_fft);

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n_fft);
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];

    let mut spec = Spectrogram::zeros(starts.len(), bins, channels, fs, n_fft, hop);
    spec.orig_len = Some(len);
    for (t, &start) in starts.iter().enumerate() {
        for m in 0..channels {
            for n in 0..n_fft {
                let x = if start + n < len { signal[m][start + n] } else { 0.0 };
                buf[n] = Complex64::new(x * window[n], 0.0);
            }
            fft.process(&mut buf);
            for f in 0..bins {
                // e^{+jωn} analysis kernel: a pure delay of τ samples shows
                // up as a phase of +ωτ, the sign the phase features assume.
                // For real input this is the conjugate of the usual FFT.
                *spec.at_mut(t, f, m) = buf[f].conj();
            }
        }
    }
    Ok(spec)
}

/// Inverse STFT via windowed overlap-add with window-square normalization.
pub fn istft(spec: &Spectrogram) -> Result<Vec<Vec<f64>>> {
    let n_fft = spec.n_fft;
    let hop = spec.hop;
    let bins = n_fft / 2 + 1;
    if spec.bins != bins {
        return Err(Error::Shape(format!(
            "expected {bins} bins for n_fft {n_fft}, got {}",
            spec.bins
        )));
    }
    let frames = spec.frames;
    if frames == 0 {
        return Err(Error::Shape("empty spectrogram".into()));
    }
    let window = sqrt_hann(n_fft);
    let full_len = (frames - 1) * hop + n_fft;

    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(n_fft);
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];

    let mut wss = vec![0.0f64; full_len];
    for t in 0..frames {
        for n in 0..n_fft {
            wss[t * hop + n] += window[n] * window[n];
        }
    }

    let mut out = Vec::with_capacity(spec.channels);
    for m in 0..spec.channels {
        let mut ola = vec![0.0f64; full_len];
        for t in 0..frames {
            // undo the conjugated analysis kernel before the inverse FFT
            buf[0] = spec.at(t, 0, m).conj();
            for f in 1..bins - 1 {
                buf[f] = spec.at(t, f, m).conj();
                buf[n_fft - f] = spec.at(t, f, m);
            }
            buf[bins - 1] = spec.at(t, bins - 1, m).conj();
            ifft.process(&mut buf);
            for n in 0..n_fft {
                ola[t * hop + n] += buf[n].re / n_fft as f64 * window[n];
            }
        }
        for n in 0..full_len {
            if wss[n] > 1e-12 {
                ola[n] /= wss[n];
            }
        }
        let keep = spec.orig_len.unwrap_or(full_len).min(full_len);
        ola.truncate(keep);
        out.push(ola);
    }
    Ok(out)
}
