//! Field models: the data needed to evaluate a graph as a number (well, a
//! truncated series in the coupling).
//!
//! A model declares its species with rational propagators and a coupling
//! table keyed by the species profile of a vertex: how many attachments
//! (legs plus internal edge ends) of each species the vertex has.  Coupling
//! values are series in a single coupling variable `g` with zero constant
//! term.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::graph::Species;
use crate::series::Series;
use crate::weight::{parse_rat, Rat};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct FieldModel {
    pub name: String,
    /// propagator of species i+1
    propagators: Vec<Rat>,
    /// species profile (attachment counts per species) -> coupling value
    couplings: BTreeMap<Vec<u32>, Series>,
    /// undeclared profiles evaluate to zero instead of erroring
    default_zero: bool,
    /// external legs carry no propagator factor when set
    amputated: bool,
    /// truncation order in g
    order: u32,
}

impl FieldModel {
    /// Single-species model with one interaction `g` at vertex degree `k`
    /// and propagator `propagator`; the usual monomial toy model.  All
    /// other degrees couple to zero.
    pub fn monomial(name: &str, k: u32, propagator: Rat, order: u32) -> FieldModel {
        let mut couplings = BTreeMap::new();
        couplings.insert(vec![k], Series::var(&["g"], &[order], 0));
        FieldModel {
            name: name.to_string(),
            propagators: vec![propagator],
            couplings,
            default_zero: true,
            amputated: false,
            order,
        }
    }

    pub fn species_count(&self) -> u8 {
        self.propagators.len() as u8
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn amputated(&self) -> bool {
        self.amputated
    }

    pub fn propagator(&self, s: Species) -> Result<&Rat> {
        self.propagators
            .get(s.0.wrapping_sub(1) as usize)
            .ok_or(Error::PropagatorUndefined(s.0 as u32))
    }

    /// Value of a vertex with the given attachment counts per species.
    pub fn coupling(&self, profile: &[u32]) -> Result<Series> {
        if let Some(c) = self.couplings.get(profile) {
            return Ok(c.clone());
        }
        if self.default_zero {
            return Ok(self.zero_series());
        }
        Err(Error::CouplingUndefined(profile.to_vec()))
    }

    /// Largest declared vertex degree; bounds the edge count of graphs that
    /// can evaluate to something nonzero.
    pub fn max_coupling_degree(&self) -> u32 {
        self.couplings
            .keys()
            .map(|p| p.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn zero_series(&self) -> Series {
        Series::zero(&["g"], &[self.order])
    }

    pub fn one_series(&self) -> Series {
        Series::one(&["g"], &[self.order])
    }

    /// Parses the declarative model format:
    ///
    /// ```toml
    /// name = "phi3"
    /// amputated = false
    /// default_zero = true
    /// max_order = 4
    ///
    /// [[species]]
    /// id = 1
    /// propagator = "1"
    ///
    /// [[coupling]]
    /// species = [3]        # attachment counts per species
    /// value = "g"          # sum of r*g^p terms
    /// ```
    pub fn from_toml_str(text: &str) -> Result<FieldModel> {
        let doc: toml::Value = text
            .parse()
            .map_err(|e| Error::Model(format!("model file: {e}")))?;
        let bad = |m: String| Error::Model(m);
        let name = doc
            .get("name")
            .and_then(|v| v.as_str())
            .ok_or_else(|| bad("missing string field `name`".into()))?
            .to_string();
        let amputated = doc.get("amputated").and_then(|v| v.as_bool()).unwrap_or(false);
        let default_zero = doc.get("default_zero").and_then(|v| v.as_bool()).unwrap_or(true);
        let order = doc
            .get("max_order")
            .and_then(|v| v.as_integer())
            .filter(|&p| (0..=64).contains(&p))
            .ok_or_else(|| bad("missing or out-of-range integer `max_order`".into()))?
            as u32;

        let species = doc
            .get("species")
            .and_then(|v| v.as_array())
            .ok_or_else(|| bad("missing [[species]] tables".into()))?;
        let mut propagators = vec![None; species.len()];
        for sp in species {
            let id = sp
                .get("id")
                .and_then(|v| v.as_integer())
                .filter(|&i| i >= 1 && i as usize <= propagators.len())
                .ok_or_else(|| bad("species `id` must be 1..=species count".into()))?;
            let p = sp
                .get("propagator")
                .and_then(|v| v.as_str())
                .ok_or_else(|| bad("species without `propagator` string".into()))?;
            let p = parse_rat(p)?;
            if p.is_zero() {
                return Err(bad(format!("species {id} has zero propagator")));
            }
            propagators[id as usize - 1] = Some(p);
        }
        let propagators: Vec<Rat> = propagators
            .into_iter()
            .collect::<Option<_>>()
            .ok_or_else(|| bad("duplicate or missing species ids".into()))?;

        let mut couplings = BTreeMap::new();
        for c in doc
            .get("coupling")
            .and_then(|v| v.as_array())
            .ok_or_else(|| bad("missing [[coupling]] tables".into()))?
        {
            let profile: Vec<u32> = c
                .get("species")
                .and_then(|v| v.as_array())
                .ok_or_else(|| bad("coupling without `species` counts".into()))?
                .iter()
                .map(|x| x.as_integer().filter(|&n| n >= 0).map(|n| n as u32))
                .collect::<Option<_>>()
                .ok_or_else(|| bad("coupling `species` must be non-negative integers".into()))?;
            if profile.len() != propagators.len() {
                return Err(bad(format!(
                    "coupling profile {profile:?} has {} entries, model has {} species",
                    profile.len(),
                    propagators.len()
                )));
            }
            let value = c
                .get("value")
                .and_then(|v| v.as_str())
                .ok_or_else(|| bad("coupling without `value` string".into()))?;
            let value = parse_coupling_expr(value, order)?;
            if !value.constant_term().is_zero() {
                return Err(bad(format!(
                    "coupling for profile {profile:?} has a g-independent part"
                )));
            }
            if couplings.insert(profile.clone(), value).is_some() {
                return Err(bad(format!("duplicate coupling profile {profile:?}")));
            }
        }
        Ok(FieldModel { name, propagators, couplings, default_zero, amputated, order })
    }
}

/// Parses a sum of `r`, `g`, `g^p`, `r*g^p` terms into a series in g.
fn parse_coupling_expr(expr: &str, order: u32) -> Result<Series> {
    let mut out = Series::zero(&["g"], &[order]);
    for term in expr.split('+') {
        let mut coeff = Rat::one();
        let mut power = 0u32;
        for factor in term.split('*') {
            let f = factor.trim();
            if let Some(p) = f.strip_prefix("g^") {
                power += p
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad exponent in `{f}`")))?;
            } else if f == "g" {
                power += 1;
            } else {
                coeff *= parse_rat(f)?;
            }
        }
        let mono = Series::var(&["g"], &[order], 0)
            .pow(power)
            .expect("same shape")
            .scale(&coeff);
        out = out.add(&mono).expect("same shape");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::{rat, rat_int};

    #[test]
    fn monomial_model() {
        let m = FieldModel::monomial("phi3", 3, rat_int(1), 4);
        assert_eq!(m.species_count(), 1);
        assert_eq!(m.propagator(Species(1)).unwrap(), &rat_int(1));
        assert_eq!(m.coupling(&[3]).unwrap().coeff(&[1]), rat_int(1));
        assert!(m.coupling(&[2]).unwrap().is_zero());
        assert!(m.propagator(Species(2)).is_err());
    }

    #[test]
    fn parses_toml() {
        let text = r#"
            name = "phi4"
            amputated = false
            max_order = 3

            [[species]]
            id = 1
            propagator = "2/3"

            [[coupling]]
            species = [4]
            value = "g"

            [[coupling]]
            species = [6]
            value = "1/2*g^2 + g^3"
        "#;
        let m = FieldModel::from_toml_str(text).unwrap();
        assert_eq!(m.name, "phi4");
        assert_eq!(m.propagator(Species(1)).unwrap(), &rat(2, 3));
        assert_eq!(m.coupling(&[4]).unwrap().coeff(&[1]), rat_int(1));
        let c6 = m.coupling(&[6]).unwrap();
        assert_eq!(c6.coeff(&[2]), rat(1, 2));
        assert_eq!(c6.coeff(&[3]), rat_int(1));
        assert!(m.coupling(&[5]).unwrap().is_zero());
    }

    #[test]
    fn rejects_bad_models() {
        for text in [
            "name = \"x\"",
            // zero propagator
            "name = \"x\"\nmax_order = 2\n[[species]]\nid = 1\npropagator = \"0\"\n[[coupling]]\nspecies = [3]\nvalue = \"g\"",
            // constant coupling
            "name = \"x\"\nmax_order = 2\n[[species]]\nid = 1\npropagator = \"1\"\n[[coupling]]\nspecies = [3]\nvalue = \"1\"",
            // profile length mismatch
            "name = \"x\"\nmax_order = 2\n[[species]]\nid = 1\npropagator = \"1\"\n[[coupling]]\nspecies = [3, 0]\nvalue = \"g\"",
        ] {
            assert!(FieldModel::from_toml_str(text).is_err(), "{text}");
        }
    }
}
