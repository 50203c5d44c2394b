//! Bundled scenario files that regenerate the reference figure set.

use crate::error::{CliError, Result};
use crate::scenario::{parse_scenario, Scenario};

#[derive(Debug, Clone, Copy)]
pub struct Figure {
    pub id: &'static str,
    pub description: &'static str,
    /// Extra plotting hint, shown in the listing.
    pub flag: Option<&'static str>,
    /// `(file name, contents)` of every scenario the figure needs.
    pub files: &'static [(&'static str, &'static str)],
}

macro_rules! bundled {
    ($($f:literal),+) => {
        &[$(($f, include_str!(concat!("../figures/", $f)))),+]
    };
}

pub const FIGURES: &[Figure] = &[
    Figure {
        id: "fig3",
        description: "Normalised LCR of selection combining over IID Rayleigh branches (N = 2, 4), plus InID Rayleigh SC with mean SNRs Ω, Ω/2, Ω/4",
        flag: None,
        files: bundled!("fig3.toml", "fig3_inid.toml"),
    },
    Figure {
        id: "fig4",
        description: "Normalised LCR of selection combining over IID Hoyt branches (q = 0.1, 0.9; N = 2, 4): simulation and asymptotes",
        flag: None,
        files: bundled!("fig4.toml"),
    },
    Figure {
        id: "fig5",
        description: "Normalised LCR of instant-switching SSC over IID Rayleigh branches (T̄ = -5, 0 dB; N = 2, 3), plus a Rayleigh/Hoyt InID-TI pair",
        flag: None,
        files: bundled!("fig5.toml", "fig5_inid.toml"),
    },
    Figure {
        id: "fig6",
        description: "Outage probability and average outage duration at 10 dB against the SSC switching threshold (Ω = 10, 20 dB; N = 2, 3; ρ = 0.95)",
        flag: Some("dual y-axis: outage probability and AOD"),
        files: bundled!("fig6.toml"),
    },
    Figure {
        id: "fig7",
        description: "Normalised LCR of instant-switching SSC over IID Nakagami-m branches (m = 2, 3; N = 2, 3; T̄ = -5 dB; ρ = 0.95)",
        flag: None,
        files: bundled!("fig7.toml"),
    },
    Figure {
        id: "fig8",
        description: "Normalised LCR of opportunistic relaying over two IID Rayleigh dual-hop DF branches (T̄_DF = -5, +5 dB)",
        flag: None,
        files: bundled!("fig8.toml"),
    },
    Figure {
        id: "fig9",
        description: "Normalised AFD of opportunistic relaying over two IID Rayleigh dual-hop DF branches (T̄_DF = -5, +5 dB)",
        flag: None,
        files: bundled!("fig9.toml"),
    },
    Figure {
        id: "fig10",
        description: "Normalised LCR of distributed (deferred-switching) SSC over IID Rayleigh dual-hop DF branches, (T̄, T̄_DF) = (-5, -8), (0, -3), (5, 2) dB",
        flag: None,
        files: bundled!("fig10.toml"),
    },
];

pub fn find(id: &str) -> Result<&'static Figure> {
    FIGURES
        .iter()
        .find(|f| f.id == id)
        .ok_or_else(|| CliError::UnknownFigure(id.to_string()))
}

impl Figure {
    pub fn scenarios(&self) -> Result<Vec<Scenario>> {
        self.files.iter().map(|(_, text)| parse_scenario(text)).collect()
    }

    pub fn listing(&self) -> String {
        match self.flag {
            Some(f) => format!("{:<6} {} [{}]", self.id, self.description, f),
            None => format!("{:<6} {}", self.id, self.description),
        }
    }
}
