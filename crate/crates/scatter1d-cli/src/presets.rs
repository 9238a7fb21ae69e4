//! Named parameter presets shipped with the binary: the mirror-symmetric
//! gain pairs (fig2-*), the conjugate-coupling pairs (fig3-*), and the
//! asymmetric complex pair (fig4), all at c = ∓1/2 and |A| = 1.

use anyhow::{bail, Result};

use crate::config::SweepConfig;

pub const PRESET_NAMES: [&str; 13] = [
    "fig2-nu-0.7",
    "fig2-nu-0.5",
    "fig2-nu0",
    "fig2-nu1",
    "fig2-nu2",
    "fig2-nu3",
    "fig3-nu-0.5",
    "fig3-nu0",
    "fig3-nu1",
    "fig3-nu2",
    "fig3-nu3",
    "fig3-nu4",
    "fig4",
];

const PRESET_SOURCES: [(&str, &str); 13] = [
    ("fig2-nu-0.7", include_str!("../presets/fig2-nu-0.7.json")),
    ("fig2-nu-0.5", include_str!("../presets/fig2-nu-0.5.json")),
    ("fig2-nu0", include_str!("../presets/fig2-nu0.json")),
    ("fig2-nu1", include_str!("../presets/fig2-nu1.json")),
    ("fig2-nu2", include_str!("../presets/fig2-nu2.json")),
    ("fig2-nu3", include_str!("../presets/fig2-nu3.json")),
    ("fig3-nu-0.5", include_str!("../presets/fig3-nu-0.5.json")),
    ("fig3-nu0", include_str!("../presets/fig3-nu0.json")),
    ("fig3-nu1", include_str!("../presets/fig3-nu1.json")),
    ("fig3-nu2", include_str!("../presets/fig3-nu2.json")),
    ("fig3-nu3", include_str!("../presets/fig3-nu3.json")),
    ("fig3-nu4", include_str!("../presets/fig3-nu4.json")),
    ("fig4", include_str!("../presets/fig4.json")),
];

pub fn load_preset(name: &str) -> Result<SweepConfig> {
    for (candidate, source) in PRESET_SOURCES {
        if candidate == name {
            return SweepConfig::from_json(source);
        }
    }
    bail!(
        "unknown preset {name:?}; available: {}",
        PRESET_NAMES.join(", ")
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use scatter1d::NonlinearityFn;

    #[test]
    fn all_presets_parse_and_validate() {
        for name in PRESET_NAMES {
            let cfg = load_preset(name).unwrap_or_else(|e| panic!("{name}: {e:#}"));
            let interaction = cfg.interaction.to_core().unwrap();
            let sites = interaction.sites().unwrap();
            assert_eq!(sites.len(), 2, "{name}");
            assert_eq!(sites[0].position, -0.5);
            assert_eq!(sites[1].position, 0.5);
            assert_eq!(cfg.amp, 1.0);
        }
    }

    #[test]
    fn fig4_couplings() {
        let cfg = load_preset("fig4").unwrap();
        let i = cfg.interaction.to_core().unwrap();
        let sites = i.sites().unwrap();
        match (&sites[0].coupling, &sites[1].coupling) {
            (
                NonlinearityFn::PowerLaw { z: z1, nu: nu1 },
                NonlinearityFn::PowerLaw { z: z2, nu: nu2 },
            ) => {
                assert_eq!((*nu1, *nu2), (2.0, 1.0));
                // z₂ = −2 z₁ = 1 + 2i
                assert_eq!(z2.re, 1.0);
                assert_eq!(z2.im, 2.0);
                assert_eq!(-2.0 * z1.re, z2.re);
                assert_eq!(-2.0 * z1.im, z2.im);
            }
            other => panic!("unexpected couplings {other:?}"),
        }
    }

    #[test]
    fn unknown_preset_lists_options() {
        let err = load_preset("nope").unwrap_err();
        assert!(format!("{err}").contains("fig2-nu2"));
    }
}
