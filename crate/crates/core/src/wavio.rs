//! 16 kHz / 16-bit PCM WAV input and output. Reading normalizes samples to
//! [−1, 1); writing clips out-of-range samples with a warning.

use std::path::Path;

use crate::error::{Error, Result};

pub const WAV_SAMPLE_RATE: u32 = 16000;

/// Reads a 16 kHz 16-bit PCM WAV file into per-channel f64 buffers.
pub fn read_wav(path: &Path) -> Result<Vec<Vec<f64>>> {
    let reader = hound::WavReader::open(path)
        .map_err(|e| Error::file(path, format!("cannot read WAV: {e}")))?;
    let spec = reader.spec();
    if spec.sample_rate != WAV_SAMPLE_RATE {
        return Err(Error::Format(format!(
            "{}: unsupported sample rate {} Hz (expected {WAV_SAMPLE_RATE}, no implicit resampling)",
            path.display(),
            spec.sample_rate
        )));
    }
    if spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
        return Err(Error::Format(format!(
            "{}: unsupported encoding ({} bit {:?}), expected 16-bit PCM",
            path.display(),
            spec.bits_per_sample,
            spec.sample_format
        )));
    }
    let channels = spec.channels as usize;
    let mut out = vec![Vec::new(); channels];
    for (i, s) in reader.into_samples::<i16>().enumerate() {
        let s = s.map_err(|e| Error::file(path, format!("corrupt sample data: {e}")))?;
        out[i % channels].push(s as f64 / 32768.0);
    }
    Ok(out)
}

/// Writes per-channel f64 buffers as 16 kHz 16-bit PCM, clipping to
/// [−1, 1) with a warning when samples fall outside.
pub fn write_wav(path: &Path, channels: &[Vec<f64>]) -> Result<()> {
    if channels.is_empty() {
        return Err(Error::InvalidArgument("no channels to write".into()));
    }
    let len = channels[0].len();
    if channels.iter().any(|c| c.len() != len) {
        return Err(Error::Shape("channels have different lengths".into()));
    }
    let spec = hound::WavSpec {
        channels: channels.len() as u16,
        sample_rate: WAV_SAMPLE_RATE,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec)
        .map_err(|e| Error::file(path, format!("cannot create WAV: {e}")))?;
    let mut clipped = 0usize;
    for n in 0..len {
        for ch in channels {
            let x = ch[n];
            let q = (x * 32768.0).round();
            if !(-32768.0..=32767.0).contains(&q) {
                clipped += 1;
            }
            writer
                .write_sample(q.clamp(-32768.0, 32767.0) as i16)
                .map_err(|e| Error::file(path, format!("write failed: {e}")))?;
        }
    }
    if clipped > 0 {
        log::warn!("{}: clipped {clipped} samples outside [-1, 1)", path.display());
    }
    writer
        .finalize()
        .map_err(|e| Error::file(path, format!("finalize failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.wav");
        let sig: Vec<f64> = (0..1000).map(|n| 0.8 * (n as f64 * 0.13).sin()).collect();
        write_wav(&path, &[sig.clone()]).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.len(), 1);
        let q = 1.0 / 32768.0f64;
        for (a, b) in sig.iter().zip(&back[0]) {
            assert!((a - b).abs() <= q * 0.5 + 1e-12);
        }
    }

    #[test]
    fn stereo_channel_order_preserved() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("st.wav");
        let left = vec![0.5; 64];
        let right = vec![-0.25; 64];
        write_wav(&path, &[left.clone(), right.clone()]).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert!((back[0][0] - 0.5).abs() < 1e-3);
        assert!((back[1][0] + 0.25).abs() < 1e-3);
    }

    #[test]
    fn wrong_rate_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("8k.wav");
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(&path, spec).unwrap();
        for _ in 0..100 {
            w.write_sample(0i16).unwrap();
        }
        w.finalize().unwrap();
        assert!(matches!(read_wav(&path), Err(Error::Format(_))));
    }

    #[test]
    fn malformed_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.wav");
        std::fs::write(&path, b"not a riff file at all").unwrap();
        assert!(read_wav(&path).is_err());
    }
}
