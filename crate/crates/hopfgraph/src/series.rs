//! Truncated multivariate formal power series over exact rationals.
//!
//! This is the independent oracle's arithmetic: coefficients are tracked
//! exactly for every exponent vector within per-variable caps, and anything
//! beyond a cap is discarded.  All binary operations require operands with
//! identical variable lists and caps.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num::{One, Zero};

use crate::weight::{format_rat, rat_int, Rat};
use crate::{Error, Result};

type Expo = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series {
    vars: Vec<String>,
    caps: Vec<u32>,
    /// exponent vector -> nonzero coefficient
    terms: BTreeMap<Expo, Rat>,
}

impl Series {
    /// The zero series in the given variables, truncated at exponent
    /// `caps[i]` in variable i.
    pub fn zero(vars: &[&str], caps: &[u32]) -> Series {
        assert_eq!(vars.len(), caps.len());
        Series {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            caps: caps.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &[&str], caps: &[u32], c: Rat) -> Series {
        let mut s = Series::zero(vars, caps);
        if !c.is_zero() {
            s.terms.insert(vec![0; s.vars.len()], c);
        }
        s
    }

    pub fn one(vars: &[&str], caps: &[u32]) -> Series {
        Series::constant(vars, caps, rat_int(1))
    }

    /// The series `x_i`.
    pub fn var(vars: &[&str], caps: &[u32], index: usize) -> Series {
        let mut s = Series::zero(vars, caps);
        if caps[index] >= 1 {
            let mut e = vec![0; s.vars.len()];
            e[index] = 1;
            s.terms.insert(e, rat_int(1));
        }
        s
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn caps(&self) -> &[u32] {
        &self.caps
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, expo: &[u32]) -> Rat {
        self.terms.get(expo).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn constant_term(&self) -> Rat {
        self.coeff(&vec![0; self.vars.len()])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Expo, &Rat)> + '_ {
        self.terms.iter()
    }

    fn same_shape(&self, other: &Series) -> Result<()> {
        if self.vars != other.vars || self.caps != other.caps {
            return Err(Error::SeriesMismatch);
        }
        Ok(())
    }

    fn insert(&mut self, e: Expo, c: Rat) {
        if c.is_zero() {
            return;
        }
        if e.iter().zip(&self.caps).any(|(x, cap)| x > cap) {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Series) -> Result<Series> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Series) -> Result<Series> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Series {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn scale(&self, k: &Rat) -> Series {
        if k.is_zero() {
            return Series { terms: BTreeMap::new(), ..self.clone() };
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= k;
        }
        out
    }

    pub fn mul(&self, other: &Series) -> Result<Series> {
        self.same_shape(other)?;
        let mut out = Series { terms: BTreeMap::new(), ..self.clone() };
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Expo = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.insert(e, c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<Series> {
        let mut out = Series::one(
            &self.vars.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
            &self.caps,
        );
        for _ in 0..k {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Partial derivative with respect to variable `index`.
    pub fn derivative(&self, index: usize) -> Series {
        let mut out = Series { terms: BTreeMap::new(), ..self.clone() };
        for (e, c) in &self.terms {
            if e[index] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[index] -= 1;
            out.insert(e2, c * rat_int(e[index] as i64));
        }
        out
    }

    /// Sets variable `index` to zero.
    pub fn at_zero(&self, index: usize) -> Series {
        let mut out = self.clone();
        out.terms.retain(|e, _| e[index] == 0);
        out
    }

    /// Substitutes `repl` for variable `index` (Horner evaluation).  The
    /// replacement must have zero constant term, otherwise coefficients
    /// beyond the caps would fold back into tracked ones.
    pub fn subst(&self, index: usize, repl: &Series) -> Result<Series> {
        self.same_shape(repl)?;
        if !repl.constant_term().is_zero() {
            return Err(Error::SubstConstant(format_rat(&repl.constant_term())));
        }
        // group terms by exponent of the substituted variable
        let mut by_deg: BTreeMap<u32, Series> = BTreeMap::new();
        for (e, c) in &self.terms {
            let d = e[index];
            let mut e2 = e.clone();
            e2[index] = 0;
            by_deg
                .entry(d)
                .or_insert_with(|| Series { terms: BTreeMap::new(), ..self.clone() })
                .insert(e2, c.clone());
        }
        // sum part_d * repl^d, powers computed incrementally; repl is
        // nilpotent under truncation so the loop can stop early
        let mut acc = Series { terms: BTreeMap::new(), ..self.clone() };
        let mut power = Series::one(
            &self.vars.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
            &self.caps,
        );
        let mut last_d = 0u32;
        for (&d, part) in &by_deg {
            for _ in last_d..d {
                power = power.mul(repl)?;
                if power.is_zero() {
                    break;
                }
            }
            last_d = d;
            acc = acc.add(&part.mul(&power)?)?;
            if power.is_zero() {
                break;
            }
        }
        Ok(acc)
    }

    /// log of a series with constant term 1.
    pub fn log(&self) -> Result<Series> {
        let c0 = self.constant_term();
        if !c0.is_one() {
            return Err(Error::LogConstant(format_rat(&c0)));
        }
        let vars: Vec<&str> = self.vars.iter().map(|s| s.as_str()).collect();
        let u = self.sub(&Series::one(&vars, &self.caps))?;
        let mut acc = Series::zero(&vars, &self.caps);
        let mut upow = u.clone();
        let mut k = 1i64;
        while !upow.is_zero() {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc = acc.add(&upow.scale(&crate::weight::rat(sign, k)))?;
            upow = upow.mul(&u)?;
            k += 1;
        }
        Ok(acc)
    }

    /// exp of a series with constant term 0.
    pub fn exp(&self) -> Result<Series> {
        let c0 = self.constant_term();
        if !c0.is_zero() {
            return Err(Error::ExpConstant(format_rat(&c0)));
        }
        let vars: Vec<&str> = self.vars.iter().map(|s| s.as_str()).collect();
        let mut acc = Series::one(&vars, &self.caps);
        let mut term = Series::one(&vars, &self.caps);
        let mut k = 1i64;
        while !term.is_zero() {
            term = term.mul(self)?.scale(&crate::weight::rat(1, k));
            acc = acc.add(&term)?;
            k += 1;
        }
        Ok(acc)
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn inverse(&self) -> Result<Series> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::InverseZeroConstant);
        }
        let vars: Vec<&str> = self.vars.iter().map(|s| s.as_str()).collect();
        // self = c0 (1 + u), inverse = 1/c0 sum (-u)^k
        let inv_c0 = rat_int(1) / &c0;
        let u = self.scale(&inv_c0).sub(&Series::one(&vars, &self.caps))?;
        let mut acc = Series::one(&vars, &self.caps);
        let mut term = Series::one(&vars, &self.caps);
        loop {
            term = term.mul(&u)?.neg();
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term)?;
        }
        Ok(acc.scale(&inv_c0))
    }

    /// One line per term, `g^2 j^3: 5/24` style, sorted by exponent.
    pub fn to_table_string(&self) -> String {
        let mut out = String::new();
        if self.terms.is_empty() {
            out.push_str("0\n");
            return out;
        }
        for (e, c) in &self.terms {
            let mut mono = String::new();
            for (v, &x) in self.vars.iter().zip(e) {
                if x == 1 {
                    let _ = write!(mono, "{v} ");
                } else if x > 1 {
                    let _ = write!(mono, "{v}^{x} ");
                }
            }
            if mono.is_empty() {
                mono.push_str("1 ");
            }
            let _ = writeln!(out, "{}: {}", mono.trim_end(), format_rat(c));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::rat;

    const V: [&str; 2] = ["g", "j"];
    const C: [u32; 2] = [4, 6];

    fn x(i: usize) -> Series {
        Series::var(&V, &C, i)
    }

    #[test]
    fn arithmetic_and_truncation() {
        let g = x(0);
        let s = g.pow(3).unwrap().add(&g.pow(2).unwrap()).unwrap();
        assert_eq!(s.coeff(&[3, 0]), rat_int(1));
        assert_eq!(s.coeff(&[2, 0]), rat_int(1));
        // above the cap everything vanishes
        assert!(g.pow(5).unwrap().is_zero());
        // cancellation prunes
        assert!(s.sub(&s).unwrap().is_zero());
    }

    #[test]
    fn shape_mismatch_rejected() {
        let a = Series::var(&V, &C, 0);
        let b = Series::var(&V, &[2, 2], 0);
        assert!(matches!(a.add(&b), Err(Error::SeriesMismatch)));
    }

    #[test]
    fn log_exp_round_trip() {
        let g = x(0);
        let j = x(1);
        let s = g.scale(&rat(1, 2)).add(&j.mul(&g).unwrap()).unwrap();
        let back = s.exp().unwrap().log().unwrap();
        assert_eq!(back, s);
        assert!(matches!(g.log(), Err(Error::LogConstant(_))));
        assert!(matches!(
            Series::one(&V, &C).exp(),
            Err(Error::ExpConstant(_))
        ));
    }

    #[test]
    fn inverse_works() {
        let one = Series::one(&V, &C);
        let s = one.add(&x(0).scale(&rat(3, 2))).unwrap();
        let prod = s.inverse().unwrap().mul(&s).unwrap();
        assert_eq!(prod, one);
        assert!(matches!(x(1).inverse(), Err(Error::InverseZeroConstant)));
    }

    #[test]
    fn derivative_and_at_zero() {
        // d/dj (g j^2) = 2 g j, then at j = 0 -> 0; second derivative -> 2g
        let s = x(0).mul(&x(1).pow(2).unwrap()).unwrap();
        let d1 = s.derivative(1);
        assert_eq!(d1.coeff(&[1, 1]), rat_int(2));
        assert!(d1.at_zero(1).is_zero());
        assert_eq!(d1.derivative(1).at_zero(1).coeff(&[1, 0]), rat_int(2));
    }

    #[test]
    fn substitution() {
        // (1 + j)^2 with j := g + g^2 -> 1 + 2g + 3g^2 + 2g^3 + g^4
        let one = Series::one(&V, &C);
        let s = one.add(&x(1)).unwrap().pow(2).unwrap();
        let repl = x(0).add(&x(0).pow(2).unwrap()).unwrap();
        let t = s.subst(1, &repl).unwrap();
        assert_eq!(t.coeff(&[0, 0]), rat_int(1));
        assert_eq!(t.coeff(&[1, 0]), rat_int(2));
        assert_eq!(t.coeff(&[2, 0]), rat_int(3));
        assert_eq!(t.coeff(&[3, 0]), rat_int(2));
        assert_eq!(t.coeff(&[4, 0]), rat_int(1));
        assert!(matches!(s.subst(1, &one), Err(Error::SubstConstant(_))));
    }

    #[test]
    fn table_format() {
        let s = x(0)
            .pow(2)
            .unwrap()
            .scale(&rat(5, 24))
            .add(&Series::one(&V, &C))
            .unwrap();
        assert_eq!(s.to_table_string(), "1: 1\ng^2: 5/24\n");
    }
}
