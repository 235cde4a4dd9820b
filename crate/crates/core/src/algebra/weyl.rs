use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_rational::BigRational;

use super::gauss::{format_param_poly, GaussianRational, ParamPoly};
use crate::error::{Error, Result};

/// Default cap on stored monomials.
pub const DEFAULT_MAX_TERMS: usize = 1_000_000;

/// Exponents `(a, b, c)` of the normal-ordered monomial `d1^a d2^b d3^c`.
pub type Mono = [u32; 3];

/// Generators and central commutators `[d_i, d_j]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Algebra {
    gens: usize,
    comm: [[ParamPoly; 3]; 3],
    param_names: [&'static str; 3],
    max_terms: usize,
}

impl Algebra {
    fn build(gens: usize, c12: ParamPoly, c23: ParamPoly, c31: ParamPoly, names: [&'static str; 3]) -> Self {
        let mut comm: [[ParamPoly; 3]; 3] = Default::default();
        comm[0][1] = c12.clone();
        comm[1][0] = c12.neg();
        comm[1][2] = c23.clone();
        comm[2][1] = c23.neg();
        comm[2][0] = c31.clone();
        comm[0][2] = c31.neg();
        Self { gens, comm, param_names: names, max_terms: DEFAULT_MAX_TERMS }
    }

    /// Two generators with `[d1, d2] = iB`, `B` symbolic.
    pub fn planar() -> Self {
        Self::build(
            2,
            ParamPoly::b_times(GaussianRational::i()),
            ParamPoly::zero(),
            ParamPoly::zero(),
            ["B", "B_", "B__"],
        )
    }

    /// Three generators with symbolic field components:
    /// `[d1, d2] = iB3`, `[d2, d3] = iB1`, `[d3, d1] = iB2`.
    pub fn spatial_symbolic() -> Self {
        let i = GaussianRational::i();
        Self::build(
            3,
            ParamPoly::monomial([0, 0, 1], i.clone()),
            ParamPoly::monomial([1, 0, 0], i.clone()),
            ParamPoly::monomial([0, 1, 0], i),
            ["B1", "B2", "B3"],
        )
    }

    /// Three generators with a fixed rational field `(b1, b2, b3)`.
    pub fn spatial(b1: &BigRational, b2: &BigRational, b3: &BigRational) -> Self {
        let ib = |b: &BigRational| {
            ParamPoly::constant(GaussianRational::new(BigRational::default(), b.clone()))
        };
        Self::build(3, ib(b3), ib(b1), ib(b2), ["B1", "B2", "B3"])
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.max_terms = max_terms;
        self
    }

    pub fn generator_count(&self) -> usize {
        self.gens
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    /// `[d_i, d_j]` with zero-based indices.
    pub fn commutator(&self, i: usize, j: usize) -> &ParamPoly {
        &self.comm[i][j]
    }

    pub fn format_scalar(&self, p: &ParamPoly) -> String {
        format_param_poly(p, &self.param_names)
    }
}

/// Normal-ordered element of the covariant-derivative algebra.
#[derive(Clone, Debug)]
pub struct WeylPoly {
    alg: Arc<Algebra>,
    terms: BTreeMap<Mono, ParamPoly>,
}

impl PartialEq for WeylPoly {
    fn eq(&self, other: &Self) -> bool {
        self.alg == other.alg && self.terms == other.terms
    }
}

impl WeylPoly {
    pub fn zero(alg: &Arc<Algebra>) -> Self {
        Self { alg: alg.clone(), terms: BTreeMap::new() }
    }

    pub fn identity(alg: &Arc<Algebra>) -> Self {
        Self::from_mono(alg, [0, 0, 0], ParamPoly::one())
    }

    /// Generator `d_{k+1}`.
    pub fn generator(alg: &Arc<Algebra>, k: usize) -> Result<Self> {
        if k >= alg.gens {
            return Err(Error::invalid("generator index out of range"));
        }
        let mut m = [0; 3];
        m[k] = 1;
        Ok(Self::from_mono(alg, m, ParamPoly::one()))
    }

    pub fn from_mono(alg: &Arc<Algebra>, m: Mono, c: ParamPoly) -> Self {
        let mut p = Self::zero(alg);
        p.add_term(m, &c);
        p
    }

    /// `d1^2 + d2^2 (+ d3^2)`.
    pub fn hamiltonian(alg: &Arc<Algebra>) -> Self {
        let mut p = Self::zero(alg);
        for k in 0..alg.gens {
            let mut m = [0; 3];
            m[k] = 2;
            p.add_term(m, &ParamPoly::one());
        }
        p
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.alg
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &ParamPoly)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Mono) -> ParamPoly {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// Highest total degree among stored monomials.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().sum()).max().unwrap_or(0)
    }

    pub(crate) fn add_term(&mut self, m: Mono, c: &ParamPoly) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_default();
        entry.add_assign(c);
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    fn check_size(self) -> Result<Self> {
        if self.terms.len() > self.alg.max_terms {
            return Err(Error::Resource(alloc::format!(
                "term map holds {} monomials, cap is {}",
                self.terms.len(),
                self.alg.max_terms
            )));
        }
        Ok(self)
    }

    pub fn add(&self, other: &WeylPoly) -> WeylPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c);
        }
        out
    }

    pub fn sub(&self, other: &WeylPoly) -> WeylPoly {
        self.add(&other.scale(&ParamPoly::constant(GaussianRational::from_int(-1))))
    }

    pub fn scale(&self, s: &ParamPoly) -> WeylPoly {
        let mut out = Self::zero(&self.alg);
        for (m, c) in &self.terms {
            out.add_term(*m, &c.mul(s));
        }
        out
    }

    /// `self · d_{k+1}`, normal ordered.
    pub fn mul_gen_right(&self, k: usize) -> Result<WeylPoly> {
        let mut out = Self::zero(&self.alg);
        for (m, c) in &self.terms {
            let mut up = *m;
            up[k] += 1;
            out.add_term(up, c);
            // d_j^e d_k = d_k d_j^e + e [d_j, d_k] d_j^{e-1} for j > k
            for j in (k + 1)..self.alg.gens {
                if m[j] == 0 {
                    continue;
                }
                let mut down = *m;
                down[j] -= 1;
                out.add_term(down, &c.mul(&self.alg.comm[j][k]).times(m[j]));
            }
        }
        out.check_size()
    }

    /// `d_{k+1} · self`, normal ordered.
    pub fn mul_gen_left(&self, k: usize) -> Result<WeylPoly> {
        let mut out = Self::zero(&self.alg);
        for (m, c) in &self.terms {
            let mut up = *m;
            up[k] += 1;
            out.add_term(up, c);
            // d_k d_j^e = d_j^e d_k + e [d_k, d_j] d_j^{e-1} for j < k
            for j in 0..k {
                if m[j] == 0 {
                    continue;
                }
                let mut down = *m;
                down[j] -= 1;
                out.add_term(down, &c.mul(&self.alg.comm[k][j]).times(m[j]));
            }
        }
        out.check_size()
    }

    /// Product `self · other`.
    pub fn mul(&self, other: &WeylPoly) -> Result<WeylPoly> {
        let mut out = Self::zero(&self.alg);
        for (m, c) in &other.terms {
            let mut acc = self.scale(c);
            for k in 0..self.alg.gens {
                for _ in 0..m[k] {
                    acc = acc.mul_gen_right(k)?;
                }
            }
            out = out.add(&acc).check_size()?;
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Result<WeylPoly> {
        let mut out = Self::identity(&self.alg);
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// `R(P) = Σ_k d_k P d_k`.
    pub fn apply_r(&self) -> Result<WeylPoly> {
        let mut out = Self::zero(&self.alg);
        for k in 0..self.alg.gens {
            let t = self.mul_gen_left(k)?.mul_gen_right(k)?;
            out = out.add(&t).check_size()?;
        }
        Ok(out)
    }

    /// Expands every monomial back into a word.
    pub fn to_words(&self) -> WordPoly {
        let mut w = WordPoly::zero(&self.alg);
        for (m, c) in &self.terms {
            let mut word = Vec::new();
            for k in 0..3 {
                word.extend(core::iter::repeat_n(k as u8, m[k] as usize));
            }
            w.add_word(word, c);
        }
        w
    }
}

impl fmt::Display for WeylPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        // descending total degree, then descending lexicographic exponents
        let mut keys: Vec<&Mono> = self.terms.keys().collect();
        keys.sort_by(|a, b| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then(b.cmp(a))
        });
        for (n, m) in keys.into_iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            let c = self.alg.format_scalar(&self.terms[m]);
            let is_id = m.iter().all(|&e| e == 0);
            let mut parts: Vec<String> = Vec::new();
            if c != "1" || is_id {
                if self.terms[m].len() > 1 || c.contains(' ') {
                    parts.push(alloc::format!("({c})"));
                } else {
                    parts.push(c);
                }
            }
            for (k, &e) in m.iter().enumerate() {
                match e {
                    0 => {}
                    1 => parts.push(alloc::format!("d{}", k + 1)),
                    _ => parts.push(alloc::format!("d{}^{}", k + 1, e)),
                }
            }
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}

/// Linear combination of arbitrary (not necessarily ordered) words in the
/// generators; letters are zero-based generator indices.
#[derive(Clone, Debug, PartialEq)]
pub struct WordPoly {
    alg: Arc<Algebra>,
    terms: BTreeMap<Vec<u8>, ParamPoly>,
}

impl WordPoly {
    pub fn zero(alg: &Arc<Algebra>) -> Self {
        Self { alg: alg.clone(), terms: BTreeMap::new() }
    }

    pub fn word(alg: &Arc<Algebra>, letters: &[u8]) -> Result<Self> {
        if letters.iter().any(|&l| l as usize >= alg.gens) {
            return Err(Error::invalid("letter outside generator range"));
        }
        let mut w = Self::zero(alg);
        w.add_word(letters.to_vec(), &ParamPoly::one());
        Ok(w)
    }

    pub fn add_word(&mut self, word: Vec<u8>, c: &ParamPoly) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(word.clone()).or_default();
        e.add_assign(c);
        if e.is_zero() {
            self.terms.remove(&word);
        }
    }

    pub fn add(&self, other: &WordPoly) -> WordPoly {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_word(w.clone(), c);
        }
        out
    }

    pub fn scale(&self, s: &ParamPoly) -> WordPoly {
        let mut out = Self::zero(&self.alg);
        for (w, c) in &self.terms {
            out.add_word(w.clone(), &c.mul(s));
        }
        out
    }

    /// Concatenation product.
    pub fn mul(&self, other: &WordPoly) -> WordPoly {
        let mut out = Self::zero(&self.alg);
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                out.add_word(w, &c1.mul(c2));
            }
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u8>, &ParamPoly)> {
        self.terms.iter()
    }
}

/// Rewrites every word into normal order by repeatedly resolving the
/// leftmost inversion `d_j d_i -> d_i d_j + [d_j, d_i]` (`j > i`).
pub fn normal_order(p: &WordPoly) -> Result<WeylPoly> {
    let alg = &p.alg;
    let mut out = WeylPoly::zero(alg);
    let mut stack: Vec<(Vec<u8>, ParamPoly)> =
        p.terms.iter().map(|(w, c)| (w.clone(), c.clone())).collect();
    let mut processed = 0usize;
    while let Some((w, c)) = stack.pop() {
        processed += 1;
        if processed > alg.max_terms.saturating_mul(16) || stack.len() > alg.max_terms {
            return Err(Error::Resource("rewrite worklist exceeded cap".into()));
        }
        match w.windows(2).position(|pair| pair[0] > pair[1]) {
            None => {
                let mut m = [0u32; 3];
                for &l in &w {
                    m[l as usize] += 1;
                }
                out.add_term(m, &c);
            }
            Some(i) => {
                let (hi, lo) = (w[i] as usize, w[i + 1] as usize);
                let mut swapped = w.clone();
                swapped.swap(i, i + 1);
                let comm = alg.comm[hi][lo].mul(&c);
                stack.push((swapped, c));
                if !comm.is_zero() {
                    let mut shorter = Vec::with_capacity(w.len() - 2);
                    shorter.extend_from_slice(&w[..i]);
                    shorter.extend_from_slice(&w[i + 2..]);
                    stack.push((shorter, comm));
                }
            }
        }
    }
    out.check_size()
}

/// Convenience: words given as 1-based generator strings such as `"221"`.
pub fn parse_word(alg: &Arc<Algebra>, s: &str) -> Result<WordPoly> {
    let mut letters = vec![];
    for ch in s.chars() {
        let d = ch.to_digit(10).ok_or_else(|| Error::invalid("word letters must be digits"))?;
        if d == 0 {
            return Err(Error::invalid("generators are numbered from 1"));
        }
        letters.push((d - 1) as u8);
    }
    WordPoly::word(alg, &letters)
}
