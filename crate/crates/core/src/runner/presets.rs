//! Embedded experiment documents, one per reproducible measurement. The run
//! lengths are full scale; `--scale` shortens them.

use crate::error::ConfigError;
use crate::runner::config::{parse_config, ExperimentConfig, Overrides};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub name: &'static str,
    pub text: &'static str,
}

impl Preset {
    /// The document's leading comment block, joined into one line.
    pub fn description(&self) -> String {
        self.text
            .lines()
            .map_while(|l| l.strip_prefix('#'))
            .map(str::trim)
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn config(&self, overrides: Overrides) -> Result<ExperimentConfig, ConfigError> {
        parse_config(self.text, overrides)
    }

    pub fn is_slow(&self) -> bool {
        self.config(Overrides::default()).map(|c| c.slow).unwrap_or(false)
    }
}

macro_rules! presets {
    ($($name:literal),* $(,)?) => {
        const PRESETS: &[Preset] = &[
            $(Preset { name: $name, text: include_str!(concat!("../../presets/", $name, ".toml")) },)*
        ];
    };
}

presets!(
    "fig2-bps-interevent",
    "fig3-bps-collapse",
    "fig4-bps-hurst",
    "fig4-bps-hurst-large",
    "fig5-stigler-timeseries",
    "fig6-stigler-returns",
    "fig7-stigler-autocorrelation",
    "fig8-stigler-return-autocorrelation",
    "fig9-genoa-returns",
    "fig10-genoa-volatility",
    "fig11-genoa-phasediagram",
    "fig12-genoa-autocorrelation",
    "fig13-hurst-comparison",
    "fig14-maslov-timeseries",
    "fig15-maslov-returns",
    "fig16-maslov-collapse",
    "fig17-maslov-autocorrelation",
    "fig18-maslov-evaporation-returns",
    "fig19-maslov-evaporation-lags",
    "fig20-maslov-hurst",
    "fig21-udm-timeseries",
    "fig22-udm-returns",
    "fig23-udm-evaporation",
    "fig24-udm-lags",
    "fig25-udm-autocorrelation",
    "fig26-udm-hurst",
);

pub fn list_presets() -> &'static [Preset] {
    PRESETS
}

pub fn preset(name: &str) -> Result<&'static Preset, ConfigError> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::config::ModelConfig;

    #[test]
    fn every_preset_parses_and_names_itself() {
        for p in list_presets() {
            let c = p.config(Overrides::default()).unwrap_or_else(|e| panic!("{}: {e}", p.name));
            assert_eq!(c.name, p.name);
            assert!(!p.description().is_empty(), "{}", p.name);
        }
        assert!(list_presets().iter().filter(|p| p.is_slow()).count() == 1);
    }

    #[test]
    fn caption_parameters() {
        let c = preset("fig3-bps-collapse").unwrap().config(Overrides::default()).unwrap();
        let sizes: Vec<(i64, usize)> = c
            .points
            .iter()
            .map(|p| match &p.model {
                ModelConfig::Bps(b) => (b.length, b.particles),
                _ => panic!(),
            })
            .collect();
        assert_eq!(sizes, vec![(250, 50), (500, 200), (250, 250)]);

        let c = preset("fig9-genoa-returns").unwrap().config(Overrides::default()).unwrap();
        let gains: Vec<f64> = c
            .points
            .iter()
            .map(|p| match &p.model {
                ModelConfig::Genoa(g) => {
                    assert_eq!((g.lifetime, g.ratio), (1000, 7.0));
                    g.gain
                }
                _ => panic!(),
            })
            .collect();
        assert_eq!(gains, vec![51.0, 52.0, 52.36]);

        let c = preset("fig25-udm-autocorrelation").unwrap().config(Overrides::default()).unwrap();
        let sets: Vec<(i64, f64, f64)> = c
            .points
            .iter()
            .map(|p| match &p.model {
                ModelConfig::Udm(u) => (u.length, u.q, u.n_bar),
                _ => panic!(),
            })
            .collect();
        assert_eq!(sets, vec![(100_000, 0.9, 1000.0), (100_000, 0.9, 100.0)]);
        assert!(preset("fig99").is_err());
    }
}
