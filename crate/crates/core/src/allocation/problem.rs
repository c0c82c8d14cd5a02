use serde::{Deserialize, Serialize};

use crate::channel::ChannelMatrix;
use crate::dims::Dims;
use crate::radiometry::{self, NoiseParams};
use crate::scene::ScenarioConfig;
use crate::{Error, Result};

/// The (access point, wavelength, branch) a user is served on. Indices are
/// zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Choice {
    pub ap: usize,
    pub wavelength: usize,
    pub branch: usize,
}

impl Choice {
    pub const fn new(ap: usize, wavelength: usize, branch: usize) -> Self {
        Choice {
            ap,
            wavelength,
            branch,
        }
    }

    /// Position in the per-user choice enumeration (ap-major).
    pub fn index(&self, dims: &Dims) -> usize {
        (self.ap * dims.wavelengths + self.wavelength) * dims.branches + self.branch
    }

    pub fn from_index(dims: &Dims, c: usize) -> Self {
        Choice {
            ap: c / (dims.wavelengths * dims.branches),
            wavelength: (c / dims.branches) % dims.wavelengths,
            branch: c % dims.branches,
        }
    }

    /// (ap, wavelength) slot index.
    pub fn slot(&self, dims: &Dims) -> usize {
        self.ap * dims.wavelengths + self.wavelength
    }
}

/// The binary selector `S[user][ap][wavelength][branch]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    dims: Dims,
    selected: Vec<bool>,
}

impl Assignment {
    pub fn empty(dims: Dims) -> Self {
        Assignment {
            dims,
            selected: vec![false; dims.len()],
        }
    }

    pub fn from_choices(dims: Dims, choices: &[Choice]) -> Self {
        let mut a = Assignment::empty(dims);
        for (u, c) in choices.iter().enumerate() {
            a.set(u, *c, true);
        }
        a
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn set(&mut self, user: usize, c: Choice, on: bool) {
        let i = self.dims.index(user, c.ap, c.wavelength, c.branch);
        self.selected[i] = on;
    }

    pub fn get(&self, user: usize, ap: usize, wavelength: usize, branch: usize) -> bool {
        self.selected[self.dims.index(user, ap, wavelength, branch)]
    }

    /// Flattened selector values.
    pub fn as_slice(&self) -> &[bool] {
        &self.selected
    }

    /// All tuples selected for `user`.
    pub fn selections(&self, user: usize) -> Vec<Choice> {
        let per = self.dims.choices();
        self.selected[user * per..(user + 1) * per]
            .iter()
            .enumerate()
            .filter(|(_, s)| **s)
            .map(|(c, _)| Choice::from_index(&self.dims, c))
            .collect()
    }

    /// The unique selection of `user`.
    pub fn choice_of(&self, user: usize) -> Result<Choice> {
        match self.selections(user).as_slice() {
            [c] => Ok(*c),
            [] => Err(Error::Unassigned(user)),
            many => Err(Error::Infeasible(format!(
                "user {user} holds {} selections",
                many.len()
            ))),
        }
    }

    pub fn choices(&self) -> Result<Vec<Choice>> {
        (0..self.dims.users).map(|u| self.choice_of(u)).collect()
    }
}

/// Inputs of the allocation model, all in A² except the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationProblem {
    pub dims: Dims,
    /// Electrical signal power `P`, flattened `[user][ap][wavelength][branch]`.
    pub signal: Vec<f64>,
    /// Shot noise `σ` from the access point when unmodulated, same layout.
    pub background: Vec<f64>,
    /// Receiver noise `σ_Rx`.
    pub receiver_noise: f64,
    /// Minimum SINR, linear.
    pub sinr_threshold: f64,
    /// Receiver parameters the noise terms were computed with.
    pub noise: NoiseParams,
}

impl AllocationProblem {
    pub fn new(
        dims: Dims,
        signal: Vec<f64>,
        background: Vec<f64>,
        receiver_noise: f64,
        sinr_threshold: f64,
        noise: NoiseParams,
    ) -> Result<Self> {
        let p = AllocationProblem {
            dims,
            signal,
            background,
            receiver_noise,
            sinr_threshold,
            noise,
        };
        p.validate()?;
        Ok(p)
    }

    /// Signal and noise terms from traced optical powers via `(R·PO)²` and
    /// `2e(R·PO)B_oB_e`.
    pub fn from_channel(config: &ScenarioConfig, matrix: &ChannelMatrix) -> Result<Self> {
        let dims = matrix.dims;
        if dims.users != config.stations.len()
            || dims.aps != config.transmitters.len()
            || matrix.wavelengths != config.wavelengths
        {
            return Err(Error::InvalidArgument(
                "channel matrix does not match the scenario".into(),
            ));
        }
        let mut signal = vec![0.0; dims.len()];
        let mut background = vec![0.0; dims.len()];
        for u in 0..dims.users {
            for a in 0..dims.aps {
                for (w, name) in config.wavelengths.iter().enumerate() {
                    let r = config.responsivity.get(name).expect("validated config");
                    for b in 0..dims.branches {
                        let i = dims.index(u, a, w, b);
                        let po = matrix.received_power[i];
                        signal[i] = radiometry::electrical_power(r, po);
                        background[i] = radiometry::shot_noise(r, po, &config.noise);
                    }
                }
            }
        }
        AllocationProblem::new(
            dims,
            signal,
            background,
            radiometry::receiver_noise(&config.noise),
            config.sinr_threshold_linear(),
            config.noise,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.signal.len() != self.dims.len() || self.background.len() != self.dims.len() {
            return bad("signal/background arrays do not match the dimensions");
        }
        if !self
            .signal
            .iter()
            .chain(&self.background)
            .all(|v| v.is_finite() && *v >= 0.0)
        {
            return bad("signal and background powers must be finite and non-negative");
        }
        if !(self.receiver_noise > 0.0 && self.receiver_noise.is_finite()) {
            return bad("receiver noise must be positive");
        }
        if !(self.sinr_threshold > 0.0 && self.sinr_threshold.is_finite()) {
            return bad("SINR threshold must be positive");
        }
        Ok(())
    }

    #[inline]
    pub fn p(&self, user: usize, ap: usize, wavelength: usize, branch: usize) -> f64 {
        self.signal[self.dims.index(user, ap, wavelength, branch)]
    }

    #[inline]
    pub fn sigma(&self, user: usize, ap: usize, wavelength: usize, branch: usize) -> f64 {
        self.background[self.dims.index(user, ap, wavelength, branch)]
    }

    /// Largest interference-free SINR any tuple could reach, `max P/σ_Rx`.
    pub fn max_sinr_bound(&self) -> f64 {
        self.signal.iter().fold(0.0f64, |m, p| m.max(*p)) / self.receiver_noise
    }

    /// Every power term multiplied by `k`.
    pub fn scaled(&self, k: f64) -> AllocationProblem {
        AllocationProblem {
            signal: self.signal.iter().map(|v| v * k).collect(),
            background: self.background.iter().map(|v| v * k).collect(),
            receiver_noise: self.receiver_noise * k,
            ..self.clone()
        }
    }

    /// Problem restricted to a subset of users, in the given order.
    pub fn restricted(&self, users: &[usize]) -> AllocationProblem {
        let per = self.dims.choices();
        let pick = |v: &[f64]| -> Vec<f64> {
            users
                .iter()
                .flat_map(|&u| v[u * per..(u + 1) * per].iter().copied())
                .collect()
        };
        AllocationProblem {
            dims: Dims {
                users: users.len(),
                ..self.dims
            },
            signal: pick(&self.signal),
            background: pick(&self.background),
            ..self.clone()
        }
    }
}
