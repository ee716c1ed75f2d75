use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Degree normalisation applied inside the bipartite message passing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum NormScenario {
    /// No normalisation.
    None = 1,
    /// Edge updates average their member nodes (`D_E⁻¹`).
    EdgeSide = 2,
    /// Symmetric `D_V^{-1/2}` around the node aggregation.
    NodeSide = 3,
    /// Both of the above.
    Both = 4,
}

impl NormScenario {
    pub const ALL: [NormScenario; 4] =
        [NormScenario::None, NormScenario::EdgeSide, NormScenario::NodeSide, NormScenario::Both];

    pub fn edge_side(self) -> bool {
        matches!(self, NormScenario::EdgeSide | NormScenario::Both)
    }

    pub fn node_side(self) -> bool {
        matches!(self, NormScenario::NodeSide | NormScenario::Both)
    }
}

impl TryFrom<u8> for NormScenario {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(NormScenario::None),
            2 => Ok(NormScenario::EdgeSide),
            3 => Ok(NormScenario::NodeSide),
            4 => Ok(NormScenario::Both),
            other => Err(format!("normalisation scenario must be 1..=4, got {other}")),
        }
    }
}

impl From<NormScenario> for u8 {
    fn from(s: NormScenario) -> u8 {
        s as u8
    }
}

impl fmt::Display for NormScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", *self as u8)
    }
}

impl FromStr for NormScenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: u8 = s.trim().parse().map_err(|_| format!("invalid scenario {s:?}"))?;
        NormScenario::try_from(v)
    }
}

/// Pooling used by the set encoder across the members of a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetPooling {
    Max,
    Mean,
    Sum,
}

impl SetPooling {
    pub const ALL: [SetPooling; 3] = [SetPooling::Max, SetPooling::Mean, SetPooling::Sum];
}

impl fmt::Display for SetPooling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SetPooling::Max => "max",
            SetPooling::Mean => "mean",
            SetPooling::Sum => "sum",
        })
    }
}

impl FromStr for SetPooling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "max" => Ok(SetPooling::Max),
            "mean" => Ok(SetPooling::Mean),
            "sum" => Ok(SetPooling::Sum),
            other => Err(format!("pooling must be max, mean or sum, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub embed_dim: usize,
    pub mpnn_layers: usize,
    pub norm_scenario: NormScenario,
    pub set_pooling: SetPooling,
    pub sortpool_k: usize,
    pub spectrum_enabled: bool,
    pub phi_hidden: usize,
    pub phi_out: usize,
    pub spectrum_hidden: usize,
    pub dropout: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            embed_dim: 20,
            mpnn_layers: 3,
            norm_scenario: NormScenario::EdgeSide,
            set_pooling: SetPooling::Sum,
            sortpool_k: 10,
            spectrum_enabled: true,
            phi_hidden: 64,
            phi_out: 64,
            spectrum_hidden: 8,
            dropout: 0.5,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.embed_dim == 0 || self.phi_hidden == 0 || self.phi_out == 0 || self.spectrum_hidden == 0 {
            return Err("layer widths must be positive".into());
        }
        if self.mpnn_layers == 0 {
            return Err("at least one message-passing layer is required".into());
        }
        if self.sortpool_k < 2 {
            return Err(format!("sortpool_k must be at least 2, got {}", self.sortpool_k));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        Ok(())
    }

    /// Width of the flattened structural readout.
    pub fn readout_width(&self) -> usize {
        self.sortpool_k * self.embed_dim
    }
}
