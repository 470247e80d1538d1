//! Plain-text model files.
//!
//! ```text
//! format_version=1
//! method=ct
//! n=8
//! t=0.3
//! seed=7
//! provenance=train.csv
//! center0=6.7193922843339745e-1 5.7037394012012611e-1 4.7222079431050357e-1
//! center1=4.4394323416424869e-1 5.7883022062339014e-1 6.8397066104045938e-1
//! ```
//!
//! Bengal models (`method=cbt`) add `gains_source` and `gains_target` lines.
//! Reals are written with 17 significant digits so they read back bit-exact.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::color::{Illuminant, Rgb};
use crate::error::{Error, Result};
use crate::tiger::{BengalModel, GainTriplet, Model, TigerModel, TrainConfig};

pub const FORMAT_VERSION: u32 = 1;

fn triplet(v: Rgb) -> String {
    format!("{:.16e} {:.16e} {:.16e}", v[0], v[1], v[2])
}

pub fn to_text(model: &Model) -> String {
    let (config, provenance, centers) = match model {
        Model::Tiger(m) => (m.config, &m.provenance, m.centers()),
        Model::Bengal(m) => (m.config, &m.provenance, m.centers()),
    };
    let mut out = String::new();
    out.push_str(&format!("format_version={FORMAT_VERSION}\n"));
    out.push_str(&format!("method={}\n", model.method()));
    out.push_str(&format!("n={}\n", config.n));
    out.push_str(&format!("t={}\n", config.t));
    out.push_str(&format!("seed={}\n", config.seed));
    out.push_str(&format!("provenance={}\n", provenance.replace('\n', " ")));
    out.push_str(&format!("center0={}\n", triplet(centers[0].to_array())));
    out.push_str(&format!("center1={}\n", triplet(centers[1].to_array())));
    if let Model::Bengal(m) = model {
        out.push_str(&format!("gains_source={}\n", triplet(m.source_gains.to_array())));
        out.push_str(&format!("gains_target={}\n", triplet(m.target_gains.to_array())));
    }
    out
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Model(msg.into())
}

fn parse_triplet(fields: &BTreeMap<String, String>, key: &str) -> Result<Rgb> {
    let raw = fields.get(key).ok_or_else(|| bad(format!("missing {key}")))?;
    let parts: Vec<f64> = raw
        .split_whitespace()
        .map(|s| s.parse::<f64>().map_err(|_| bad(format!("{key}: bad number {s:?}"))))
        .collect::<Result<_>>()?;
    if parts.len() != 3 {
        return Err(bad(format!("{key}: expected 3 values, got {}", parts.len())));
    }
    Ok([parts[0], parts[1], parts[2]])
}

fn parse_scalar<T: std::str::FromStr>(fields: &BTreeMap<String, String>, key: &str) -> Result<T> {
    let raw = fields.get(key).ok_or_else(|| bad(format!("missing {key}")))?;
    raw.trim().parse().map_err(|_| bad(format!("{key}: cannot parse {raw:?}")))
}

pub fn from_text(text: &str) -> Result<Model> {
    let mut fields = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| bad(format!("line {}: expected key=value", i + 1)))?;
        fields.insert(k.trim().to_string(), v.trim().to_string());
    }
    let version: u32 = parse_scalar(&fields, "format_version")?;
    if version != FORMAT_VERSION {
        return Err(bad(format!("unsupported format_version {version}")));
    }
    let method = fields.get("method").ok_or_else(|| bad("missing method"))?.clone();
    let config = TrainConfig::new(parse_scalar(&fields, "n")?, parse_scalar(&fields, "t")?, parse_scalar(&fields, "seed")?)
        .map_err(|e| bad(e.to_string()))?;
    let provenance = fields.get("provenance").cloned().unwrap_or_default();
    let center = |key: &str| -> Result<Illuminant> {
        Illuminant::from_unit(parse_triplet(&fields, key)?).map_err(|e| bad(format!("{key}: {e}")))
    };
    let centers = [center("center0")?, center("center1")?];
    match method.as_str() {
        "ct" => Ok(Model::Tiger(TigerModel::new(centers, config, provenance))),
        "cbt" => {
            let gains = |key: &str| -> Result<GainTriplet> {
                GainTriplet::from_array(parse_triplet(&fields, key)?).map_err(|e| bad(format!("{key}: {e}")))
            };
            Ok(Model::Bengal(BengalModel::new(
                gains("gains_source")?,
                gains("gains_target")?,
                centers,
                config,
                provenance,
            )))
        }
        other => Err(bad(format!("unknown method {other:?}"))),
    }
}

pub fn save(model: &Model, path: &Path) -> Result<()> {
    fs::write(path, to_text(model))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Model> {
    from_text(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::normalize;
    use proptest::prelude::*;

    fn unit() -> impl Strategy<Value = Illuminant> {
        [1e-6f64..1.0, 1e-6f64..1.0, 1e-6f64..1.0].prop_map(|v| normalize(v).unwrap())
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(a in unit(), b in unit(), ga in unit(), gb in unit(), seed in any::<u64>(), t in 0.0f64..0.99, n in 1u32..20, cbt in any::<bool>()) {
            let cfg = TrainConfig::new(n, t, seed).unwrap();
            let model = if cbt {
                Model::Bengal(BengalModel::new(
                    GainTriplet::from_array(ga.to_array()).unwrap(),
                    GainTriplet::from_array(gb.to_array()).unwrap(),
                    [a, b], cfg, "corpus A"))
            } else {
                Model::Tiger(TigerModel::new([a, b], cfg, "corpus A"))
            };
            let text = to_text(&model);
            prop_assert_eq!(from_text(&text).unwrap(), model);
        }
    }

    #[test]
    fn rejects_bad_files() {
        let good = to_text(&Model::Tiger(TigerModel::new(
            [Illuminant::new(1.0, 0.6, 0.3).unwrap(), Illuminant::new(0.3, 0.6, 1.0).unwrap()],
            TrainConfig::default(),
            "",
        )));
        assert!(from_text(&good).is_ok());
        assert!(from_text(&good.replace("format_version=1", "format_version=2")).is_err());
        assert!(from_text(&good.replace("method=ct", "method=dog")).is_err());
        assert!(from_text(&good.replace("method=ct", "method=cbt")).is_err());
        assert!(from_text(&good.replace("n=8", "n=0")).is_err());
        let no_center: String = good.lines().filter(|l| !l.starts_with("center1")).map(|l| format!("{l}\n")).collect();
        assert!(from_text(&no_center).is_err());
        assert!(from_text("garbage").is_err());
    }
}
