use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ir::{received_optical_power, rms_delay_spread, Bandwidth3Db, ImpulseResponse, SpectrumAnalyzer};
use super::trace::{LinkTrace, Tracer};
use super::TraceParams;
use crate::dims::Dims;
use crate::scene::{ScenarioConfig, Scene};
use crate::{Error, Result};

pub const CACHE_FORMAT: &str = "owc-channel-matrix";
pub const CACHE_VERSION: u32 = 1;

/// Wavelength-independent summary of one (user, AP, branch) link, per watt
/// transmitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSummary {
    pub los: f64,
    pub first_order: f64,
    pub second_order: f64,
    /// `None` when no light reaches the branch.
    pub bandwidth: Option<Bandwidth3Db>,
    pub rms_delay_spread: Option<f64>,
}

/// Received optical powers for every (user, AP, wavelength, branch).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelMatrix {
    pub format: String,
    pub version: u32,
    pub scenario: String,
    /// SHA-256 of the canonical scenario config and trace parameters.
    pub content_hash: String,
    pub params: TraceParams,
    pub dims: Dims,
    pub wavelengths: Vec<String>,
    /// Received optical power, W, flattened `[user][ap][wavelength][branch]`.
    pub received_power: Vec<f64>,
    /// Flattened `[user][ap][branch]`.
    pub links: Vec<LinkSummary>,
    /// Unit-power impulse responses, flattened `[user][ap][branch]`. Not
    /// persisted.
    #[serde(skip)]
    pub impulse_responses: Option<Vec<ImpulseResponse>>,
}

/// Hex SHA-256 identifying a (config, trace parameters) pair.
pub fn content_hash(config: &ScenarioConfig, params: &TraceParams) -> String {
    let mut h = Sha256::new();
    h.update(config.canonical_json().as_bytes());
    h.update(b"\n");
    h.update(
        serde_json::to_string(params)
            .expect("params serialize")
            .as_bytes(),
    );
    format!("{:x}", h.finalize())
}

/// Trace every link of the scene.
///
/// Receivers are traced in parallel and reassembled in index order, so the
/// matrix is bit-identical for any worker count.
pub fn compute_channel_matrix(scene: &Scene, params: &TraceParams) -> Result<ChannelMatrix> {
    let tracer = Tracer::new(scene, params)?;
    let cfg = &scene.config;
    let dims = Dims::new(
        scene.users(),
        scene.access_points(),
        scene.wavelengths(),
        scene.branches(),
    );

    let jobs: Vec<(usize, usize)> = (0..dims.users)
        .flat_map(|u| (0..dims.branches).map(move |b| (u, b)))
        .collect();
    let traced: Vec<Vec<LinkTrace>> = jobs
        .par_iter()
        .map(|&(u, b)| tracer.trace_receiver(u, b))
        .collect::<Result<_>>()?;

    // reorder [user][branch][ap] -> [user][ap][branch]
    let mut irs: Vec<Option<LinkTrace>> = vec![None; dims.links()];
    for ((u, b), per_ap) in jobs.iter().zip(traced) {
        for (a, link) in per_ap.into_iter().enumerate() {
            irs[dims.link_index(*u, a, *b)] = Some(link);
        }
    }
    let irs: Vec<LinkTrace> = irs.into_iter().map(|l| l.expect("every link traced")).collect();

    let analyzer = SpectrumAnalyzer::new(params.fft_len);
    let links: Vec<LinkSummary> = irs
        .par_iter()
        .map(|l| {
            let total = received_optical_power(&l.ir);
            let (bandwidth, spread) = if total > 0.0 {
                (
                    Some(analyzer.bandwidth_3db(&l.ir)?),
                    Some(rms_delay_spread(&l.ir)?),
                )
            } else {
                (None, None)
            };
            Ok(LinkSummary {
                los: l.order_power[0],
                first_order: l.order_power[1],
                second_order: l.order_power[2],
                bandwidth,
                rms_delay_spread: spread,
            })
        })
        .collect::<Result<_>>()?;

    let mut received_power = vec![0.0; dims.len()];
    for u in 0..dims.users {
        for a in 0..dims.aps {
            let tx = &cfg.transmitters[a];
            for (w, name) in cfg.wavelengths.iter().enumerate() {
                let pt = tx.power(name).expect("validated config");
                for b in 0..dims.branches {
                    let unit = received_optical_power(&irs[dims.link_index(u, a, b)].ir);
                    received_power[dims.index(u, a, w, b)] = unit * pt;
                }
            }
        }
    }

    Ok(ChannelMatrix {
        format: CACHE_FORMAT.to_string(),
        version: CACHE_VERSION,
        scenario: cfg.name.clone(),
        content_hash: content_hash(cfg, params),
        params: params.clone(),
        dims,
        wavelengths: cfg.wavelengths.clone(),
        received_power,
        links,
        impulse_responses: Some(irs.into_iter().map(|l| l.ir).collect()),
    })
}

impl ChannelMatrix {
    /// Received optical power `PO`, W.
    pub fn power(&self, user: usize, ap: usize, wavelength: usize, branch: usize) -> f64 {
        self.received_power[self.dims.index(user, ap, wavelength, branch)]
    }

    pub fn link(&self, user: usize, ap: usize, branch: usize) -> &LinkSummary {
        &self.links[self.dims.link_index(user, ap, branch)]
    }

    /// Impulse response of one tuple at the access point's power on
    /// `wavelength`, when the matrix was traced in this process.
    pub fn impulse_response(
        &self,
        config: &ScenarioConfig,
        user: usize,
        ap: usize,
        wavelength: usize,
        branch: usize,
    ) -> Option<ImpulseResponse> {
        let irs = self.impulse_responses.as_ref()?;
        let pt = config
            .transmitters
            .get(ap)?
            .power(config.wavelengths.get(wavelength)?)?;
        Some(irs[self.dims.link_index(user, ap, branch)].scaled(pt))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel matrix serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ChannelMatrix> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: ChannelMatrix = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        if m.format != CACHE_FORMAT || m.version != CACHE_VERSION {
            return Err(Error::Format {
                path: path.to_owned(),
                message: format!("unsupported cache format {} v{}", m.format, m.version),
            });
        }
        if m.received_power.len() != m.dims.len() || m.links.len() != m.dims.links() {
            return Err(Error::Format {
                path: path.to_owned(),
                message: "array lengths do not match the recorded dimensions".into(),
            });
        }
        Ok(m)
    }

    /// The cached matrix at `path` if it exists, parses and matches `hash`.
    pub fn load_if_fresh(path: impl AsRef<Path>, hash: &str) -> Option<ChannelMatrix> {
        let path = path.as_ref();
        if !path.exists() {
            return None;
        }
        match ChannelMatrix::load(path) {
            Ok(m) if m.content_hash == hash => Some(m),
            Ok(_) => None,
            Err(e) => {
                log::warn!("ignoring unreadable cache: {e}");
                None
            }
        }
    }
}
