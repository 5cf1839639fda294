//! File locations for inputs and outputs.
//!
//! Inputs under the data directory:
//! `mask.json`, `regions.json`, `manifest.json`,
//! `obs/{year}/{month:02}` (binary), `conc/{year}/{month:02}` (concentration),
//! `ens/{year}/{month:02}/lead{lead}/member{k:02}` (binary).
//!
//! Outputs are grouped per stage as `{stage}/{year}/{month:02}/lead{lead}/`.

use std::path::PathBuf;

use crate::config::lead_dir;

#[derive(Clone, Debug)]
pub struct DataLayout {
    pub root: PathBuf,
}

impl DataLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DataLayout { root: root.into() }
    }

    pub fn mask(&self) -> PathBuf {
        self.root.join("mask.json")
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn obs(&self, year: i32, month: u8) -> PathBuf {
        self.root.join("obs").join(year.to_string()).join(format!("{month:02}.json"))
    }

    pub fn conc(&self, year: i32, month: u8) -> PathBuf {
        self.root.join("conc").join(year.to_string()).join(format!("{month:02}.json"))
    }

    pub fn ens_dir(&self, year: i32, month: u8, lead: f64) -> PathBuf {
        self.root.join("ens").join(year.to_string()).join(format!("{month:02}")).join(lead_dir(lead))
    }

    pub fn member(&self, year: i32, month: u8, lead: f64, k: usize) -> PathBuf {
        self.ens_dir(year, month, lead).join(format!("member{k:02}.json"))
    }

    /// Member files present for a forecast, in order.
    pub fn members(&self, year: i32, month: u8, lead: f64) -> Vec<PathBuf> {
        let mut out = Vec::new();
        while self.member(year, month, lead, out.len()).exists() {
            out.push(self.member(year, month, lead, out.len()));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageDir {
    Shift,
    Contour,
    Generate,
    Weights,
    Forecast,
    Evaluate,
}

impl StageDir {
    pub fn name(self) -> &'static str {
        match self {
            StageDir::Shift => "shift",
            StageDir::Contour => "contour",
            StageDir::Generate => "generate",
            StageDir::Weights => "weights",
            StageDir::Forecast => "forecast",
            StageDir::Evaluate => "evaluate",
        }
    }
}

#[derive(Clone, Debug)]
pub struct OutLayout {
    pub root: PathBuf,
}

impl OutLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        OutLayout { root: root.into() }
    }

    pub fn stage(&self, stage: StageDir) -> PathBuf {
        self.root.join(stage.name())
    }

    pub fn job(&self, stage: StageDir, year: i32, month: u8, lead: f64) -> PathBuf {
        self.stage(stage).join(year.to_string()).join(format!("{month:02}")).join(lead_dir(lead))
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }
}
