use serde::{Deserialize, Serialize};

/// Cardinalities of the user, access point, wavelength and branch sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub users: usize,
    pub aps: usize,
    pub wavelengths: usize,
    pub branches: usize,
}

impl Dims {
    pub const fn new(users: usize, aps: usize, wavelengths: usize, branches: usize) -> Self {
        Dims {
            users,
            aps,
            wavelengths,
            branches,
        }
    }

    /// Number of (ap, wavelength, branch) choices open to one user.
    pub fn choices(&self) -> usize {
        self.aps * self.wavelengths * self.branches
    }

    /// Number of (ap, wavelength) slots.
    pub fn slots(&self) -> usize {
        self.aps * self.wavelengths
    }

    pub fn len(&self) -> usize {
        self.users * self.choices()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat row-major index of `[user][ap][wavelength][branch]`.
    #[inline]
    pub fn index(&self, user: usize, ap: usize, wavelength: usize, branch: usize) -> usize {
        ((user * self.aps + ap) * self.wavelengths + wavelength) * self.branches + branch
    }

    /// Flat index of `[user][ap][branch]` (wavelength-independent data).
    #[inline]
    pub fn link_index(&self, user: usize, ap: usize, branch: usize) -> usize {
        (user * self.aps + ap) * self.branches + branch
    }

    pub fn links(&self) -> usize {
        self.users * self.aps * self.branches
    }
}
