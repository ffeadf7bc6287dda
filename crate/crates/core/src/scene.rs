//! Scene generation, separation and evaluation pipeline shared by the CLI.
//!
//! Scenes live in one directory each: `scene.json` (manifest), `mixture.wav`
//! and `stems/*.wav`. The in-car seat layout places the dual mic across the
//! car width at the head of the cabin, with four seat regions S1–S4; the
//! S1/S3 region centers are 16° apart in azimuth.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::beamform::{
    apply_beamformer, beampattern, complement_mask, masked_scm_utterance, mcwf_weights,
    mvdr_weights, oracle_irm, BeamGrid, BeamWeights,
};
use crate::error::{Error, Result};
use crate::features::{
    attention_posterior, feature_mask, region_feature, spatial_feature, FeatureMap, PosteriorMode,
};
use crate::geometry::{Location3D, MicArray, RegionBox};
use crate::metrics::{si_sdr, MetricReport, SceneMetric};
use crate::room::{render_scene, Room, SceneSource, SceneSpec, SourceRole};
use crate::signals::{pink_noise, speechlike};
use crate::spectral::{istft, stft, Spectrogram, DEFAULT_HOP, DEFAULT_N_FFT};
use crate::wavio::{read_wav, write_wav};

/// Car interior: x across the width, y along the length, z up.
pub const CAR_DIMS: [f64; 3] = [1.5, 2.8, 1.3];
/// Array center at the head of the cabin, mid-width.
pub const ARRAY_ORIGIN: [f64; 3] = [0.75, 0.3, 1.0];
pub const SITTING_HEIGHT_RANGE: [f64; 2] = [0.95, 1.15];
/// Azimuth gap between the S1 and S3 region centers, degrees.
pub const S1_S3_AZIMUTH_GAP_DEG: f64 = 16.0;

/// Seat region centers in the array frame (Cartesian, meters).
/// S3's lateral offset is solved so its center azimuth is exactly 16°
/// from S1's.
pub fn seat_centers() -> BTreeMap<String, [f64; 3]> {
    let s1 = [-0.35, 0.9, 0.05];
    let az1 = f64::atan2(s1[1], s1[0]);
    let az3 = az1 - S1_S3_AZIMUTH_GAP_DEG.to_radians();
    let y3 = 2.0;
    let x3 = y3 / az3.tan();
    let mut m = BTreeMap::new();
    m.insert("S1".to_string(), s1);
    m.insert("S2".to_string(), [0.35, 0.9, 0.05]);
    m.insert("S3".to_string(), [x3, y3, 0.1]);
    m.insert("S4".to_string(), [0.35, 2.0, 0.1]);
    m
}

pub fn seat_region(region_id: &str, half_extents: [f64; 3]) -> Result<RegionBox> {
    let centers = seat_centers();
    let c = centers.get(region_id).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "unknown region {region_id}; expected one of {:?}",
            centers.keys().collect::<Vec<_>>()
        ))
    })?;
    RegionBox::new(Location3D::from_cartesian(*c)?, half_extents)
}

/// Simulation configuration, read from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Speaker mix: "s1", "s1+2", "s1+3", "s1+4", "s1+2+3", "s1+2+4",
    /// "s1+3+4". The target is always S1.
    pub preset: String,
    pub num_scenes: usize,
    pub duration_s: f64,
    pub t60_range: [f64; 2],
    pub max_order: usize,
    pub sir_db_range: [f64; 2],
    pub snr_db_range: [f64; 2],
    pub noise_enabled: bool,
    pub noise_count: usize,
    pub seed: u64,
    pub half_extents: [f64; 3],
    pub fs: f64,
    pub c: f64,
    /// Optional WAV per region id; omitted regions use the built-in
    /// speech-like generator.
    pub source_wavs: BTreeMap<String, PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            preset: "s1+3".into(),
            num_scenes: 1,
            duration_s: 4.0,
            t60_range: [0.05, 0.3],
            max_order: 20,
            sir_db_range: [-6.0, 6.0],
            snr_db_range: [-5.0, 20.0],
            noise_enabled: true,
            noise_count: 3,
            seed: 0,
            half_extents: RegionBox::default_half_extents(),
            fs: 16000.0,
            c: 343.0,
            source_wavs: BTreeMap::new(),
        }
    }
}

impl SimConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: SimConfig = serde_json::from_str(&text)
            .map_err(|e| Error::file(path, format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.speaker_regions()?;
        if self.num_scenes == 0 {
            return Err(Error::InvalidArgument("num_scenes must be ≥ 1".into()));
        }
        if self.duration_s < 1.0 {
            return Err(Error::InvalidArgument("duration_s must be ≥ 1 s".into()));
        }
        if self.noise_enabled && self.noise_count < 3 {
            return Err(Error::InvalidArgument(
                "at least 3 directional noises are required when noise is enabled".into(),
            ));
        }
        Ok(())
    }

    /// Region ids in the preset; the first one is the target.
    pub fn speaker_regions(&self) -> Result<Vec<String>> {
        let p = self.preset.to_lowercase();
        let parts: Vec<&str> = p.split('+').collect();
        if parts.first() != Some(&"s1") {
            return Err(Error::InvalidArgument(format!(
                "preset must start with s1, got {}",
                self.preset
            )));
        }
        let mut out = vec!["S1".to_string()];
        for part in &parts[1..] {
            match *part {
                "2" => out.push("S2".into()),
                "3" => out.push("S3".into()),
                "4" => out.push("S4".into()),
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown preset element {other} in {}",
                        self.preset
                    )))
                }
            }
        }
        Ok(out)
    }
}

/// Per-scene RNG stream: independent of other scenes under the same seed.
pub fn scene_rng(master_seed: u64, scene_id: u64) -> ChaCha8Rng {
    let mixed = master_seed
        .wrapping_mul(0x9e3779b97f4a7c15)
        .wrapping_add(scene_id.wrapping_mul(0xd1b54a32d192ed03))
        .wrapping_add(0x2545f4914f6cdd1d);
    ChaCha8Rng::seed_from_u64(mixed)
}

/// Serialized description of one region used in a scene.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionInfo {
    pub region_id: String,
    pub region: RegionBox,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestFiles {
    pub mixture: String,
    pub stems: Vec<String>,
}

/// `scene.json`: everything needed to reprocess a rendered scene.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneManifest {
    pub scene_id: String,
    pub preset: String,
    pub spec: SceneSpec,
    pub regions: Vec<RegionInfo>,
    pub gains: Vec<f64>,
    pub duration_s: f64,
    pub files: ManifestFiles,
}

impl SceneManifest {
    pub fn read_from(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::file(path, format!("bad manifest: {e}")))
    }

    pub fn target_region(&self) -> Result<&RegionInfo> {
        let target = self
            .spec
            .target_index()
            .ok_or_else(|| Error::InvalidArgument("manifest has no target".into()))?;
        let id = &self.spec.sources[target].region_id;
        self.regions
            .iter()
            .find(|r| &r.region_id == id)
            .ok_or_else(|| Error::InvalidArgument(format!("no region entry for {id}")))
    }
}

fn sample_in_box(rng: &mut ChaCha8Rng, region: &RegionBox) -> Result<Location3D> {
    let c = region.center.to_cartesian();
    let h = region.half_extents;
    for _ in 0..64 {
        let p = [
            c[0] + rng.gen_range(-h[0]..h[0]),
            c[1] + rng.gen_range(-h[1]..h[1]),
            c[2] + rng.gen_range(-h[2]..h[2]),
        ];
        if let Ok(loc) = Location3D::from_cartesian(p) {
            return Ok(loc);
        }
    }
    Err(Error::InvalidRegion("cannot sample a valid location in region".into()))
}

/// Builds the scene spec and source signals for scene `idx` of a config.
pub fn build_scene(config: &SimConfig, idx: u64) -> Result<(SceneSpec, Vec<RegionInfo>, Vec<Vec<f64>>)> {
    config.validate()?;
    let mut rng = scene_rng(config.seed, idx);
    let n_samples = (config.duration_s * config.fs) as usize;
    let regions_used = config.speaker_regions()?;

    let t60 = rng.gen_range(config.t60_range[0]..=config.t60_range[1]);
    let sir_db = rng.gen_range(config.sir_db_range[0]..=config.sir_db_range[1]);
    let snr_db = rng.gen_range(config.snr_db_range[0]..=config.snr_db_range[1]);
    let room = Room::new(CAR_DIMS, t60, config.max_order)?;

    let mut sources = Vec::new();
    let mut signals: Vec<Vec<f64>> = Vec::new();
    let mut region_infos = Vec::new();
    for (k, region_id) in regions_used.iter().enumerate() {
        let region = seat_region(region_id, config.half_extents)?;
        let mut loc = sample_in_box(&mut rng, &region)?;
        // constrain sitting height to the configured range
        let mut p = loc.to_cartesian();
        let z_lo = SITTING_HEIGHT_RANGE[0] - ARRAY_ORIGIN[2];
        let z_hi = SITTING_HEIGHT_RANGE[1] - ARRAY_ORIGIN[2];
        p[2] = p[2].clamp(z_lo, z_hi);
        loc = Location3D::from_cartesian(p)?;
        let role = if k == 0 {
            SourceRole::Target
        } else {
            SourceRole::Interferer
        };
        sources.push(SceneSource {
            region_id: region_id.clone(),
            location: loc,
            role,
        });
        let sig = match config.source_wavs.get(region_id) {
            Some(path) => {
                let chans = read_wav(path)?;
                let mut s = chans.into_iter().next().ok_or_else(|| {
                    Error::file(path, "WAV has no channels")
                })?;
                if s.len() < n_samples {
                    return Err(Error::file(
                        path,
                        format!("shorter than scene duration ({} < {n_samples})", s.len()),
                    ));
                }
                s.truncate(n_samples);
                s
            }
            None => speechlike(rng.gen(), n_samples, config.fs),
        };
        signals.push(sig);
        region_infos.push(RegionInfo {
            region_id: region_id.clone(),
            region,
        });
    }

    if config.noise_enabled {
        for n in 0..config.noise_count {
            // anywhere in the cabin, off the walls
            let p_room = [
                rng.gen_range(0.15..CAR_DIMS[0] - 0.15),
                rng.gen_range(0.15..CAR_DIMS[1] - 0.15),
                rng.gen_range(0.15..CAR_DIMS[2] - 0.15),
            ];
            let rel = [
                p_room[0] - ARRAY_ORIGIN[0],
                p_room[1] - ARRAY_ORIGIN[1],
                p_room[2] - ARRAY_ORIGIN[2],
            ];
            let loc = match Location3D::from_cartesian(rel) {
                Ok(l) => l,
                Err(_) => continue,
            };
            sources.push(SceneSource {
                region_id: format!("N{n}"),
                location: loc,
                role: SourceRole::Noise,
            });
            signals.push(pink_noise(rng.gen(), n_samples, config.fs, 20.0, 7800.0));
        }
    }

    let spec = SceneSpec {
        room,
        array_origin: ARRAY_ORIGIN,
        array: MicArray::dual_default(),
        sources,
        sir_db,
        snr_db,
        seed: config.seed,
        fs: config.fs,
        c: config.c,
    };
    spec.validate()?;
    Ok((spec, region_infos, signals))
}

/// Renders scenes `0..num_scenes` into per-scene directories under `out`.
pub fn simulate_to_dir(config: &SimConfig, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut dirs = Vec::new();
    for idx in 0..config.num_scenes as u64 {
        let scene_id = format!("scene_{idx:04}");
        let dir = out.join(&scene_id);
        let stems_dir = dir.join("stems");
        std::fs::create_dir_all(&stems_dir).map_err(|e| Error::io(&stems_dir, e))?;

        let (spec, regions, signals) = build_scene(config, idx)?;
        let rendered = render_scene(&spec, &signals)?;

        // headroom so 16-bit quantization never clips
        let peak = rendered
            .mixture
            .iter()
            .flat_map(|ch| ch.iter())
            .fold(0.0f64, |a, &b| a.max(b.abs()));
        let norm = if peak > 0.5 { 0.5 / peak } else { 1.0 };

        let mut stem_files = Vec::new();
        for (i, stem) in rendered.stems.iter().enumerate() {
            let s = &spec.sources[i];
            let role = match s.role {
                SourceRole::Target => "target",
                SourceRole::Interferer => "interferer",
                SourceRole::Noise => "noise",
            };
            let name = format!("stems/{i:02}_{role}_{}.wav", s.region_id);
            let scaled: Vec<Vec<f64>> = stem
                .iter()
                .map(|ch| ch.iter().map(|x| x * norm).collect())
                .collect();
            write_wav(&dir.join(&name), &scaled)?;
            stem_files.push(name);
        }
        let mixture: Vec<Vec<f64>> = rendered
            .mixture
            .iter()
            .map(|ch| ch.iter().map(|x| x * norm).collect())
            .collect();
        write_wav(&dir.join("mixture.wav"), &mixture)?;

        let manifest = SceneManifest {
            scene_id: scene_id.clone(),
            preset: config.preset.clone(),
            spec,
            regions,
            gains: rendered.gains.iter().map(|g| g * norm).collect(),
            duration_s: config.duration_s,
            files: ManifestFiles {
                mixture: "mixture.wav".into(),
                stems: stem_files,
            },
        };
        let path = dir.join("scene.json");
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::file(&path, format!("serialize failed: {e}")))?;
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        dirs.push(dir);
    }
    Ok(dirs)
}

/// Location-input mode for separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureMode {
    /// Spatial feature at the region center only.
    SfCenter,
    /// Spatial feature at a location perturbed uniformly inside the region,
    /// mimicking a localization error.
    SfPerturbed,
    /// Region feature over the center plus 8 vertices.
    RfRegion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaskSource {
    OracleIrm,
    Feature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeamformerKind {
    Mvdr,
    Mcwf,
    MaskOnly,
}

/// Separation run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: FeatureMode,
    pub posterior: PosteriorMode,
    pub mask: MaskSource,
    pub beamformer: BeamformerKind,
    pub ref_channel: usize,
    pub seed: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beamformer == BeamformerKind::Mcwf && self.mask == MaskSource::Feature {
            return Err(Error::InvalidArgument(
                "mcwf uses the ground-truth target spectrogram; combine it with --mask oracle-irm"
                    .into(),
            ));
        }
        Ok(())
    }

    /// Condition label used in output file names and reports.
    pub fn label(&self) -> String {
        let mode = match self.mode {
            FeatureMode::SfCenter => "sf-center",
            FeatureMode::SfPerturbed => "sf-perturbed",
            FeatureMode::RfRegion => "rf-region",
        };
        let mask = match self.mask {
            MaskSource::OracleIrm => "oracle-irm",
            MaskSource::Feature => "feature",
        };
        let bf = match self.beamformer {
            BeamformerKind::Mvdr => "mvdr",
            BeamformerKind::Mcwf => "mcwf",
            BeamformerKind::MaskOnly => "mask-only",
        };
        format!("{mode}_{mask}_{bf}")
    }
}

/// Loaded scene directory contents used by separation and evaluation.
pub struct LoadedScene {
    pub manifest: SceneManifest,
    pub mixture: Vec<Vec<f64>>,
    pub dir: PathBuf,
}

pub fn load_scene(dir: &Path) -> Result<LoadedScene> {
    let manifest = SceneManifest::read_from(&dir.join("scene.json"))?;
    let mixture = read_wav(&dir.join(&manifest.files.mixture))?;
    Ok(LoadedScene {
        manifest,
        mixture,
        dir: dir.to_path_buf(),
    })
}

fn read_stem(scene: &LoadedScene, index: usize) -> Result<Vec<Vec<f64>>> {
    let name = scene.manifest.files.stems.get(index).ok_or(Error::Index {
        index,
        len: scene.manifest.files.stems.len(),
    })?;
    read_wav(&scene.dir.join(name))
}

/// The target-direction feature maps computed for a scene, kept for dumping.
pub struct SeparationFeatures {
    /// SF at the chosen location, or the RF map in region mode.
    pub primary: FeatureMap,
    /// Candidate SF stack (region mode only).
    pub sf_stack: Vec<FeatureMap>,
    pub posterior: Vec<f64>,
}

/// Computes the mode's target feature map from the mixture spectrogram.
///
/// Region mode deliberately reads only the region geometry, never the true
/// source location from the manifest.
pub fn compute_features(
    spec: &Spectrogram,
    manifest: &SceneManifest,
    config: &RunConfig,
) -> Result<SeparationFeatures> {
    let array = &manifest.spec.array;
    let c = manifest.spec.c;
    let region = &manifest.target_region()?.region;
    match config.mode {
        FeatureMode::SfCenter => {
            let sf = spatial_feature(spec, &region.center, array, c)?;
            Ok(SeparationFeatures {
                primary: sf,
                sf_stack: Vec::new(),
                posterior: Vec::new(),
            })
        }
        FeatureMode::SfPerturbed => {
            let mut rng = scene_rng(config.seed, 0x5eed);
            let loc = sample_in_box(&mut rng, region)?;
            let sf = spatial_feature(spec, &loc, array, c)?;
            Ok(SeparationFeatures {
                primary: sf,
                sf_stack: Vec::new(),
                posterior: Vec::new(),
            })
        }
        FeatureMode::RfRegion => {
            let mut sf_stack = Vec::new();
            for v in region.vertices()? {
                sf_stack.push(spatial_feature(spec, &v, array, c)?);
            }
            let posterior = attention_posterior(&sf_stack, &config.posterior)?;
            let rf = region_feature(&sf_stack, &posterior)?;
            Ok(SeparationFeatures {
                primary: rf,
                sf_stack,
                posterior,
            })
        }
    }
}

fn oracle_masks(scene: &LoadedScene, config: &RunConfig) -> Result<FeatureMap> {
    let manifest = &scene.manifest;
    let target = manifest
        .spec
        .target_index()
        .ok_or_else(|| Error::InvalidArgument("no target in manifest".into()))?;
    let target_wav = read_stem(scene, target)?;
    let target_spec = stft(&target_wav, DEFAULT_N_FFT, DEFAULT_HOP, manifest.spec.fs)?;
    let mut other_specs = Vec::new();
    for i in 0..manifest.spec.sources.len() {
        if i == target {
            continue;
        }
        let wav = read_stem(scene, i)?;
        other_specs.push(stft(&wav, DEFAULT_N_FFT, DEFAULT_HOP, manifest.spec.fs)?);
    }
    let refs: Vec<&Spectrogram> = other_specs.iter().collect();
    oracle_irm(&target_spec, &refs, config.ref_channel)
}

/// Result of a separation run.
pub struct SeparationOutput {
    pub enhanced: Vec<f64>,
    pub features: SeparationFeatures,
    pub mask: FeatureMap,
    pub weights: Option<BeamWeights>,
}

/// STFT → features → mask → SCMs → weights → w^H Y → iSTFT.
pub fn separate(scene: &LoadedScene, config: &RunConfig) -> Result<SeparationOutput> {
    config.validate()?;
    let manifest = &scene.manifest;
    let spec = stft(&scene.mixture, DEFAULT_N_FFT, DEFAULT_HOP, manifest.spec.fs)?;
    let features = compute_features(&spec, manifest, config)?;
    let mask = match config.mask {
        MaskSource::OracleIrm => oracle_masks(scene, config)?,
        MaskSource::Feature => feature_mask(&features.primary)?,
    };

    let (enh_spec, weights) = match config.beamformer {
        BeamformerKind::MaskOnly => {
            let mut out = spec.channel(config.ref_channel)?;
            for t in 0..out.num_frames() {
                for f in 0..out.num_bins() {
                    *out.at_mut(t, f, 0) *= mask.at(t, f);
                }
            }
            (out, None)
        }
        BeamformerKind::Mvdr => {
            let scm_s = masked_scm_utterance(&spec, &mask)?;
            let scm_n = masked_scm_utterance(&spec, &complement_mask(&mask)?)?;
            let w = mvdr_weights(&scm_s, &scm_n, config.ref_channel)?;
            (apply_beamformer(&w, &spec)?, Some(w))
        }
        BeamformerKind::Mcwf => {
            let target = manifest
                .spec
                .target_index()
                .ok_or_else(|| Error::InvalidArgument("no target in manifest".into()))?;
            let target_wav = read_stem(scene, target)?;
            let target_spec = stft(&target_wav, DEFAULT_N_FFT, DEFAULT_HOP, manifest.spec.fs)?;
            let target_ref = target_spec.channel(config.ref_channel)?;
            let w = mcwf_weights(&spec, &target_ref, config.ref_channel)?;
            (apply_beamformer(&w, &spec)?, Some(w))
        }
    };
    let enhanced = istft(&enh_spec)?.remove(0);
    Ok(SeparationOutput {
        enhanced,
        features,
        mask,
        weights,
    })
}

/// Runs separation on a scene directory and writes `enhanced-<label>.wav`,
/// plus optional float32 feature dumps.
pub fn separate_to_dir(dir: &Path, config: &RunConfig, dump_features: bool) -> Result<PathBuf> {
    let scene = load_scene(dir)?;
    let out = separate(&scene, config)?;
    let path = dir.join(format!("enhanced-{}.wav", config.label()));
    write_wav(&path, &[out.enhanced])?;
    if dump_features {
        dump_map(&dir.join(format!("feature-{}.f32", config.label())), &out.features.primary)?;
        dump_map(&dir.join(format!("mask-{}.f32", config.label())), &out.mask)?;
    }
    Ok(path)
}

/// Raw dump: little-endian f32 values, frame-major, with a JSON sidecar
/// describing the shape.
fn dump_map(path: &Path, map: &FeatureMap) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    for v in map.values() {
        file.write_all(&(*v as f32).to_le_bytes())
            .map_err(|e| Error::io(path, e))?;
    }
    let sidecar = path.with_extension("f32.json");
    let meta = serde_json::json!({
        "dtype": "f32le",
        "frames": map.num_frames(),
        "bins": map.num_bins(),
        "layout": "frame-major",
    });
    std::fs::write(&sidecar, serde_json::to_string_pretty(&meta).unwrap())
        .map_err(|e| Error::io(&sidecar, e))?;
    Ok(())
}

/// Reference signal for metrics: the reverberant clean target at the
/// reference channel.
pub fn reference_signal(scene: &LoadedScene, ref_channel: usize) -> Result<Vec<f64>> {
    let target = scene
        .manifest
        .spec
        .target_index()
        .ok_or_else(|| Error::InvalidArgument("no target in manifest".into()))?;
    let mut stem = read_stem(scene, target)?;
    if ref_channel >= stem.len() {
        return Err(Error::Index {
            index: ref_channel,
            len: stem.len(),
        });
    }
    Ok(stem.remove(ref_channel))
}

/// Evaluates each condition's enhanced output against the reverberant
/// target reference, per scene.
pub fn evaluate_scenes(
    scene_dirs: &[PathBuf],
    conditions: &[String],
    ref_channel: usize,
) -> Result<MetricReport> {
    if scene_dirs.is_empty() {
        return Err(Error::InvalidArgument("no scene directories given".into()));
    }
    if conditions.is_empty() {
        return Err(Error::InvalidArgument("no conditions given".into()));
    }
    let mut report = MetricReport::default();
    for dir in scene_dirs {
        let scene = load_scene(dir)?;
        let reference = reference_signal(&scene, ref_channel)?;
        let mix = &scene.mixture[ref_channel];
        let si_mix = si_sdr(&reference, mix)?;
        for cond in conditions {
            let path = dir.join(format!("enhanced-{cond}.wav"));
            if !path.exists() {
                return Err(Error::file(&path, "missing enhanced file for condition"));
            }
            let enh = read_wav(&path)?.remove(0);
            let n = enh.len().min(reference.len());
            let si_enh = si_sdr(&reference[..n], &enh[..n])?;
            report.push(SceneMetric {
                scene_id: format!("{}/{}", scene.manifest.preset, scene.manifest.scene_id),
                condition: cond.clone(),
                si_sdr_mix: si_mix,
                si_sdr_enh: si_enh,
            });
        }
    }
    Ok(report)
}

/// Grid export formats for beampatterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridFormat {
    Csv,
    Raw,
}

/// Computes MVDR weights for a scene (per the run config's mask source) and
/// writes the beampattern over the grid.
pub fn beampattern_to_file(
    dir: &Path,
    config: &RunConfig,
    grid: &BeamGrid,
    bands: &[usize],
    out_path: &Path,
    format: GridFormat,
) -> Result<()> {
    let scene = load_scene(dir)?;
    let out = separate(&scene, config)?;
    let w = out.weights.ok_or_else(|| {
        Error::InvalidArgument("beampattern needs a beamformer (mvdr or mcwf), not mask-only".into())
    })?;
    let resp = beampattern(
        &w,
        grid,
        bands,
        &scene.manifest.spec.array,
        DEFAULT_N_FFT,
        scene.manifest.spec.fs,
        scene.manifest.spec.c,
        true,
    )?;
    write_grid(out_path, grid, &resp, format)
}

pub fn write_grid(path: &Path, grid: &BeamGrid, resp: &[f64], format: GridFormat) -> Result<()> {
    match format {
        GridFormat::Csv => {
            let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
            writeln!(file, "theta_deg,phi_deg,dist_m,response_db").map_err(|e| Error::io(path, e))?;
            for (i, &az) in grid.azimuths.iter().enumerate() {
                for (j, &el) in grid.elevations.iter().enumerate() {
                    for (k, &d) in grid.distances.iter().enumerate() {
                        writeln!(
                            file,
                            "{:.3},{:.3},{:.3},{:.4}",
                            az.to_degrees(),
                            el.to_degrees(),
                            d,
                            resp[grid.index(i, j, k)]
                        )
                        .map_err(|e| Error::io(path, e))?;
                    }
                }
            }
            Ok(())
        }
        GridFormat::Raw => {
            let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
            for v in resp {
                file.write_all(&(*v as f32).to_le_bytes())
                    .map_err(|e| Error::io(path, e))?;
            }
            let sidecar = path.with_extension("json");
            let meta = serde_json::json!({
                "dtype": "f32le",
                "order": ["azimuth", "elevation", "distance"],
                "azimuths_rad": grid.azimuths,
                "elevations_rad": grid.elevations,
                "distances_m": grid.distances,
            });
            std::fs::write(&sidecar, serde_json::to_string_pretty(&meta).unwrap())
                .map_err(|e| Error::io(&sidecar, e))?;
            Ok(())
        }
    }
}
