//! Human-editable experiment configuration: a basis rank, named
//! automorphism blocks with integer-encoded images (and optional supplied
//! inverses), named rays over those generators, and a free-form parameter
//! section consumed by the command layer.
//!
//! ```text
//! rank = 3
//!
//! [auto phi]
//! a -> 1 2 3
//! b -> 2 1 2
//! c -> 3 1 2 3
//! inv a -> 1 1 -3 1 1 -3 -2
//! inp_free = true
//!
//! [ray phi_ray]
//! period = phi
//!
//! [params]
//! depths = 3 4 5
//! ```

use std::collections::BTreeMap;

use thiserror::Error;

use crate::autos::{AutoError, Automorphism, GammaAlphabet, GammaRay};
use crate::traintrack::{RoseMap, TrainTrackError};
use crate::words::{Word, WordError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {0}: {1}")]
    Line(usize, String),
    #[error("missing `rank = N` before the first section")]
    MissingRank,
    #[error("unknown automorphism `{0}`")]
    UnknownAuto(String),
    #[error("unknown ray `{0}`")]
    UnknownRay(String),
    #[error("automorphism `{name}` is missing the image of generator {index}")]
    MissingImage { name: String, index: usize },
    #[error("automorphism `{name}` defines generator {index}, beyond rank {rank}")]
    GeneratorOutOfRank {
        name: String,
        index: usize,
        rank: usize,
    },
    #[error("bad map expression `{0}`; expected NAME or NAME^POWER")]
    BadMapExpr(String),
    #[error(transparent)]
    Auto(#[from] AutoError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    TrainTrack(#[from] TrainTrackError),
}

#[derive(Clone, Debug, Default)]
pub struct AutoSpec {
    pub images: BTreeMap<usize, Word>,
    pub inverses: BTreeMap<usize, Word>,
    /// Caller-supplied certification that the map has no periodic INPs.
    pub inp_free: bool,
}

#[derive(Clone, Debug, Default)]
pub struct RaySpec {
    pub head: Vec<String>,
    pub period: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Config {
    pub rank: usize,
    pub autos: BTreeMap<String, AutoSpec>,
    pub rays: BTreeMap<String, RaySpec>,
    pub params: BTreeMap<String, String>,
    /// The raw text, kept verbatim for report echo and cache keys.
    pub source: String,
}

enum Section {
    Top,
    Auto(String),
    Ray(String),
    Params,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut config = Config {
            rank: 0,
            autos: BTreeMap::new(),
            rays: BTreeMap::new(),
            params: BTreeMap::new(),
            source: text.to_string(),
        };
        let mut section = Section::Top;
        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let mut parts = header.split_whitespace();
                match (parts.next(), parts.next()) {
                    (Some("auto"), Some(name)) => {
                        config.autos.entry(name.to_string()).or_default();
                        section = Section::Auto(name.to_string());
                    }
                    (Some("ray"), Some(name)) => {
                        config.rays.entry(name.to_string()).or_default();
                        section = Section::Ray(name.to_string());
                    }
                    (Some("params"), None) => section = Section::Params,
                    _ => {
                        return Err(ConfigError::Line(
                            lineno,
                            format!("unknown section `[{header}]`"),
                        ))
                    }
                }
                continue;
            }
            match &section {
                Section::Top => {
                    let (key, value) = split_kv(line, lineno)?;
                    if key == "rank" {
                        config.rank = value.parse().map_err(|_| {
                            ConfigError::Line(lineno, format!("bad rank `{value}`"))
                        })?;
                    } else {
                        return Err(ConfigError::Line(
                            lineno,
                            format!("unexpected key `{key}` outside a section"),
                        ));
                    }
                }
                Section::Auto(name) => {
                    let spec = config.autos.get_mut(name).unwrap();
                    if let Some((lhs, rhs)) = line.split_once("->") {
                        let lhs = lhs.trim();
                        let rhs = rhs.trim();
                        let (is_inverse, gen) = match lhs.strip_prefix("inv ") {
                            Some(g) => (true, g.trim()),
                            None => (false, lhs),
                        };
                        let index = parse_generator(gen)
                            .ok_or_else(|| {
                                ConfigError::Line(lineno, format!("bad generator `{gen}`"))
                            })?;
                        let word = Word::parse(rhs)?;
                        if is_inverse {
                            spec.inverses.insert(index, word);
                        } else {
                            spec.images.insert(index, word);
                        }
                    } else {
                        let (key, value) = split_kv(line, lineno)?;
                        match key {
                            "inp_free" => {
                                spec.inp_free = value == "true";
                            }
                            _ => {
                                return Err(ConfigError::Line(
                                    lineno,
                                    format!("unknown automorphism key `{key}`"),
                                ))
                            }
                        }
                    }
                }
                Section::Ray(name) => {
                    let spec = config.rays.get_mut(name).unwrap();
                    let (key, value) = split_kv(line, lineno)?;
                    let names: Vec<String> =
                        value.split_whitespace().map(|s| s.to_string()).collect();
                    match key {
                        "head" => spec.head = names,
                        "period" => spec.period = names,
                        _ => {
                            return Err(ConfigError::Line(
                                lineno,
                                format!("unknown ray key `{key}`"),
                            ))
                        }
                    }
                }
                Section::Params => {
                    let (key, value) = split_kv(line, lineno)?;
                    config.params.insert(key.to_string(), value.to_string());
                }
            }
        }
        if config.rank == 0 {
            return Err(ConfigError::MissingRank);
        }
        Ok(config)
    }

    /// Build the named automorphism, verifying any supplied inverse.
    pub fn automorphism(&self, name: &str) -> Result<Automorphism, ConfigError> {
        let spec = self
            .autos
            .get(name)
            .ok_or_else(|| ConfigError::UnknownAuto(name.to_string()))?;
        if let Some(&bad) = spec
            .images
            .keys()
            .chain(spec.inverses.keys())
            .find(|&&i| i > self.rank)
        {
            return Err(ConfigError::GeneratorOutOfRank {
                name: name.to_string(),
                index: bad,
                rank: self.rank,
            });
        }
        let mut images = Vec::with_capacity(self.rank);
        for i in 1..=self.rank {
            let im = spec.images.get(&i).ok_or_else(|| ConfigError::MissingImage {
                name: name.to_string(),
                index: i,
            })?;
            images.push(im.clone());
        }
        let inverses = if spec.inverses.is_empty() {
            None
        } else {
            let mut invs = Vec::with_capacity(self.rank);
            for i in 1..=self.rank {
                let im = spec.inverses.get(&i).ok_or_else(|| ConfigError::MissingImage {
                    name: format!("inv {name}"),
                    index: i,
                })?;
                invs.push(im.clone());
            }
            Some(invs)
        };
        Ok(Automorphism::new(self.rank, images, inverses, Some(name.to_string()))?)
    }

    pub fn inp_free(&self, name: &str) -> bool {
        // power expressions inherit the base map's certification
        let base = name.split('^').next().unwrap_or(name);
        self.autos.get(base).map(|s| s.inp_free).unwrap_or(false)
    }

    /// Resolve `NAME` or `NAME^POWER` to a rose map.
    pub fn rose_map(&self, expr: &str) -> Result<RoseMap, ConfigError> {
        let auto = self.map_expr(expr)?;
        Ok(RoseMap::from_automorphism(&auto)?)
    }

    pub fn map_expr(&self, expr: &str) -> Result<Automorphism, ConfigError> {
        match expr.split_once('^') {
            None => self.automorphism(expr),
            Some((name, pow)) => {
                let n: u32 = pow
                    .parse()
                    .map_err(|_| ConfigError::BadMapExpr(expr.to_string()))?;
                Ok(self.automorphism(name)?.power(n))
            }
        }
    }

    pub fn alphabet(&self) -> Result<GammaAlphabet, ConfigError> {
        let mut gens = Vec::new();
        for name in self.autos.keys() {
            gens.push((name.clone(), self.automorphism(name)?));
        }
        Ok(GammaAlphabet::new(gens)?)
    }

    pub fn ray(&self, name: &str) -> Result<GammaRay, ConfigError> {
        let spec = self
            .rays
            .get(name)
            .ok_or_else(|| ConfigError::UnknownRay(name.to_string()))?;
        Ok(GammaRay::new(
            self.alphabet()?,
            spec.head.clone(),
            spec.period.clone(),
        )?)
    }
}

fn split_kv(line: &str, lineno: usize) -> Result<(&str, &str), ConfigError> {
    line.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| ConfigError::Line(lineno, format!("expected `key = value` in `{line}`")))
}

/// Generators are named a..z or by 1-based index.
fn parse_generator(s: &str) -> Option<usize> {
    if let Ok(n) = s.parse::<usize>() {
        return (n >= 1).then_some(n);
    }
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if c.is_ascii_lowercase() => Some((c as u8 - b'a') as usize + 1),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "\
# the two rank-3 example maps
rank = 3

[auto phi]
a -> 1 2 3
b -> 2 1 2
c -> 3 1 2 3
inv a -> 1 1 -3 1 1 -3 -2
inv b -> 2 3 -1 -1
inv c -> 3 -1
inp_free = true

[auto psi]
a -> 3 1 2
b -> 3 1
c -> 1 3 1 2
inv a -> 3 -1
inv b -> -2 1
inv c -> 2 1 -3
inp_free = true

[ray phi_ray]
period = phi

[ray mixed_ray]
head = phi psi
period = psi

[params]
depths = 3 4 5
horizon = 12
";

    #[test]
    fn parses_example() {
        let cfg = Config::parse(EXAMPLE).unwrap();
        assert_eq!(cfg.rank, 3);
        let phi = cfg.automorphism("phi").unwrap();
        assert!(phi.is_positive());
        assert!(phi.has_inverse());
        assert_eq!(
            phi.apply(&Word::parse("1").unwrap()).unwrap(),
            Word::parse("1 2 3").unwrap()
        );
        assert!(cfg.inp_free("phi"));
        assert!(cfg.inp_free("psi^2"));

        let psi2 = cfg.map_expr("psi^2").unwrap();
        assert_eq!(
            psi2.apply(&Word::parse("2").unwrap()).unwrap(),
            Word::parse("1 3 1 2 3 1 2").unwrap()
        );

        let ray = cfg.ray("phi_ray").unwrap();
        assert_eq!(ray.cyclic_generator(), Some("phi"));
        let mixed = cfg.ray("mixed_ray").unwrap();
        assert_eq!(mixed.cyclic_generator(), None);
        assert_eq!(mixed.letter_name(1), Some("phi"));
        assert_eq!(mixed.letter_name(3), Some("psi"));
        assert_eq!(cfg.params.get("horizon").map(|s| s.as_str()), Some("12"));
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(
            Config::parse("[auto x]\na -> 1\n"),
            Err(ConfigError::MissingRank)
        ));
        assert!(Config::parse("rank = 3\nbogus = 1\n").is_err());
        let cfg = Config::parse("rank = 3\n[auto x]\na -> 1 2\nb -> 2\n").unwrap();
        assert!(matches!(
            cfg.automorphism("x"),
            Err(ConfigError::MissingImage { .. })
        ));
        assert!(matches!(
            cfg.automorphism("nope"),
            Err(ConfigError::UnknownAuto(_))
        ));
    }

    #[test]
    fn out_of_rank_generator_rejected() {
        let cfg = Config::parse("rank = 2\n[auto x]\na -> 1 2\nb -> 2\nc -> 1\n").unwrap();
        assert!(matches!(
            cfg.automorphism("x"),
            Err(ConfigError::GeneratorOutOfRank { index: 3, .. })
        ));
    }

    #[test]
    fn bad_inverse_surfaces_at_build() {
        let text = "rank = 2\n[auto x]\na -> 1 2\nb -> 2\ninv a -> 1\ninv b -> 2\n";
        let cfg = Config::parse(text).unwrap();
        assert!(matches!(
            cfg.automorphism("x"),
            Err(ConfigError::Auto(AutoError::BadInverse(_)))
        ));
    }
}
