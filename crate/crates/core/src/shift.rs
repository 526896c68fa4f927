//! Countable Markov shifts described by finitely many forbidden transitions,
//! their finite truncations, and periodic words.

use crate::error::{Error, Result};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

pub type Symbol = u64;

/// Largest symbol any algorithm will touch unless configured otherwise.
pub const DEFAULT_SYMBOL_CAP: Symbol = 1_000_000;

/// Default refusal threshold on `|symbols|^n` for listing periodic words.
pub const DEFAULT_WORD_CAP: f64 = 1e7;

/// A 0/1 transition structure on `{alphabet_min, alphabet_min + 1, …}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionRule {
    pub alphabet_min: Symbol,
    pub forbidden_pairs: BTreeSet<(Symbol, Symbol)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet_max: Option<Symbol>,
}

impl TransitionRule {
    pub fn new(
        alphabet_min: Symbol,
        forbidden_pairs: impl IntoIterator<Item = (Symbol, Symbol)>,
        alphabet_max: Option<Symbol>,
    ) -> Result<Self> {
        let rule = TransitionRule {
            alphabet_min,
            forbidden_pairs: forbidden_pairs.into_iter().collect(),
            alphabet_max,
        };
        rule.validate()?;
        Ok(rule)
    }

    /// The positive-geodesic alphabet: symbols ≥ 3 with five forbidden pairs.
    pub fn positive_geodesic() -> Self {
        TransitionRule {
            alphabet_min: 3,
            forbidden_pairs: [(3, 3), (3, 4), (3, 5), (4, 3), (5, 3)].into_iter().collect(),
            alphabet_max: None,
        }
    }

    /// Full shift on `{min, min + 1, …}`.
    pub fn full(min: Symbol) -> Self {
        TransitionRule { alphabet_min: min, forbidden_pairs: BTreeSet::new(), alphabet_max: None }
    }

    /// Check the descriptor invariants: pairs lie in the alphabet and no row or
    /// column of the matrix vanishes.
    pub fn validate(&self) -> Result<()> {
        if let Some(max) = self.alphabet_max {
            if max < self.alphabet_min {
                return Err(Error::Descriptor(format!(
                    "alphabet_max {max} below alphabet_min {}",
                    self.alphabet_min
                )));
            }
        }
        for &(i, j) in &self.forbidden_pairs {
            if !self.in_alphabet(i) || !self.in_alphabet(j) {
                return Err(Error::Descriptor(format!("forbidden pair ({i},{j}) outside alphabet")));
            }
        }
        let top = self.free_from();
        let hi = self.alphabet_max.map_or(top, |m| m.min(top));
        for a in self.alphabet_min..=hi {
            let row = (self.alphabet_min..=hi).any(|b| !self.forbidden_pairs.contains(&(a, b)))
                || self.alphabet_max.is_none_or(|m| m > hi);
            let col = (self.alphabet_min..=hi).any(|b| !self.forbidden_pairs.contains(&(b, a)))
                || self.alphabet_max.is_none_or(|m| m > hi);
            if !row || !col {
                return Err(Error::Descriptor(format!("symbol {a} has an empty row or column")));
            }
        }
        Ok(())
    }

    pub fn in_alphabet(&self, a: Symbol) -> bool {
        a >= self.alphabet_min && self.alphabet_max.is_none_or(|m| a <= m)
    }

    /// Smallest symbol from which on no symbol appears in a forbidden pair.
    pub fn free_from(&self) -> Symbol {
        self.forbidden_pairs
            .iter()
            .map(|&(i, j)| i.max(j) + 1)
            .max()
            .unwrap_or(self.alphabet_min)
            .max(self.alphabet_min)
    }

    pub fn is_finite(&self) -> bool {
        self.alphabet_max.is_some()
    }

    /// Symbols whose rows/columns may differ, followed by one free representative.
    fn representatives(&self) -> Vec<Symbol> {
        let top = self.free_from();
        let hi = self.alphabet_max.map_or(top, |m| m.min(top));
        (self.alphabet_min..=hi).collect()
    }
}

/// `B(a, b)`: whether `a → b` is allowed.
pub fn is_allowed(rule: &TransitionRule, a: Symbol, b: Symbol) -> Result<bool> {
    for s in [a, b] {
        if s < rule.alphabet_min {
            return Err(Error::Domain(format!(
                "symbol {s} below alphabet minimum {}",
                rule.alphabet_min
            )));
        }
    }
    if !rule.in_alphabet(a) || !rule.in_alphabet(b) {
        return Ok(false);
    }
    Ok(!rule.forbidden_pairs.contains(&(a, b)))
}

fn allowed(rule: &TransitionRule, a: Symbol, b: Symbol) -> bool {
    rule.in_alphabet(a) && rule.in_alphabet(b) && !rule.forbidden_pairs.contains(&(a, b))
}

/// Whether a finite candidate set gives big images and preimages.
pub fn check_bip(rule: &TransitionRule, candidates: &[Symbol]) -> bool {
    let cands: Vec<Symbol> = candidates.iter().copied().filter(|&c| rule.in_alphabet(c)).collect();
    if cands.is_empty() {
        return false;
    }
    rule.representatives().into_iter().all(|a| {
        cands.iter().any(|&b| allowed(rule, b, a)) && cands.iter().any(|&b| allowed(rule, a, b))
    })
}

/// A finite restriction of a transition rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteShift {
    pub symbols: Vec<Symbol>,
    /// Row-major 0/1 adjacency, `adjacency[i][j]` for `symbols[i] → symbols[j]`.
    pub adjacency: Vec<Vec<bool>>,
    pub irreducible: bool,
    /// Nontrivial strongly connected components, as index lists, largest first.
    pub recurrent_classes: Vec<Vec<usize>>,
}

impl FiniteShift {
    pub fn from_adjacency(symbols: Vec<Symbol>, adjacency: Vec<Vec<bool>>) -> Self {
        let n = symbols.len();
        let mut g = DiGraph::<(), ()>::with_capacity(n, 0);
        let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
        for (i, row) in adjacency.iter().enumerate() {
            for (j, &a) in row.iter().enumerate() {
                if a {
                    g.add_edge(nodes[i], nodes[j], ());
                }
            }
        }
        let mut classes: Vec<Vec<usize>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut v: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
                v.sort_unstable();
                v
            })
            .filter(|c| c.len() > 1 || adjacency[c[0]][c[0]])
            .collect();
        classes.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        let irreducible = n > 0 && classes.first().is_some_and(|c| c.len() == n);
        FiniteShift { symbols, adjacency, irreducible, recurrent_classes: classes }
    }

    /// Full shift on the given symbols.
    pub fn full_block(symbols: Vec<Symbol>) -> Self {
        let n = symbols.len();
        Self::from_adjacency(symbols, vec![vec![true; n]; n])
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, s: Symbol) -> Option<usize> {
        self.symbols.binary_search(&s).ok()
    }

    pub fn allowed(&self, a: Symbol, b: Symbol) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => self.adjacency[i][j],
            _ => false,
        }
    }

    /// Largest recurrent class (ties broken by smallest symbol).
    pub fn recurrent_class(&self) -> Option<&[usize]> {
        self.recurrent_classes.first().map(|c| c.as_slice())
    }

    /// Period of the largest recurrent class (gcd of cycle lengths).
    pub fn period(&self) -> Option<usize> {
        let class = self.recurrent_class()?;
        let inside: Vec<bool> =
            (0..self.len()).map(|i| class.binary_search(&i).is_ok()).collect();
        let mut level = vec![usize::MAX; self.len()];
        level[class[0]] = 0;
        let mut queue = std::collections::VecDeque::from([class[0]]);
        let mut g = 0usize;
        while let Some(i) = queue.pop_front() {
            for j in 0..self.len() {
                if !self.adjacency[i][j] || !inside[j] {
                    continue;
                }
                if level[j] == usize::MAX {
                    level[j] = level[i] + 1;
                    queue.push_back(j);
                } else {
                    g = num_integer::gcd(g, level[i] + 1 - level[j]);
                }
            }
        }
        Some(g)
    }

    pub fn is_aperiodic(&self) -> bool {
        self.irreducible && self.period() == Some(1)
    }
}

/// Restrict `rule` to symbols `alphabet_min..=max_symbol`.
pub fn truncate(rule: &TransitionRule, max_symbol: Symbol) -> Result<FiniteShift> {
    if max_symbol < rule.alphabet_min {
        return Err(Error::Domain(format!(
            "max_symbol {max_symbol} below alphabet minimum {}",
            rule.alphabet_min
        )));
    }
    if max_symbol > DEFAULT_SYMBOL_CAP {
        return Err(Error::Domain(format!("max_symbol {max_symbol} above symbol cap")));
    }
    let top = rule.alphabet_max.map_or(max_symbol, |m| m.min(max_symbol));
    let symbols: Vec<Symbol> = (rule.alphabet_min..=top).collect();
    let adjacency = symbols
        .iter()
        .map(|&a| symbols.iter().map(|&b| allowed(rule, a, b)).collect())
        .collect();
    Ok(FiniteShift::from_adjacency(symbols, adjacency))
}

/// A finite digit word; periodic words also require the wrap-around pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word {
    pub digits: Vec<Symbol>,
    pub periodic: bool,
}

impl Word {
    pub fn new(digits: Vec<Symbol>, periodic: bool) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::Domain("empty word".into()));
        }
        Ok(Word { digits, periodic })
    }

    pub fn is_admissible(&self, rule: &TransitionRule) -> bool {
        let d = &self.digits;
        d.iter().all(|&s| rule.in_alphabet(s))
            && d.windows(2).all(|p| allowed(rule, p[0], p[1]))
            && (!self.periodic || allowed(rule, d[d.len() - 1], d[0]))
    }
}

/// All length-`n` words whose cyclic extension is admissible in `shift`.
pub fn periodic_words(shift: &FiniteShift, n: usize) -> Result<Vec<Word>> {
    periodic_words_capped(shift, n, DEFAULT_WORD_CAP)
}

pub fn periodic_words_capped(shift: &FiniteShift, n: usize, cap: f64) -> Result<Vec<Word>> {
    if n == 0 {
        return Err(Error::Domain("word length must be at least 1".into()));
    }
    let requested = (shift.len() as f64).powi(n as i32);
    if requested > cap {
        return Err(Error::OracleScaleExceeded { requested, cap });
    }
    let mut out = Vec::new();
    let mut path = Vec::with_capacity(n);
    for start in 0..shift.len() {
        path.clear();
        path.push(start);
        collect_cycles(shift, n, &mut path, &mut out);
    }
    Ok(out)
}

fn collect_cycles(shift: &FiniteShift, n: usize, path: &mut Vec<usize>, out: &mut Vec<Word>) {
    let last = *path.last().expect("nonempty path");
    if path.len() == n {
        if shift.adjacency[last][path[0]] {
            out.push(Word {
                digits: path.iter().map(|&i| shift.symbols[i]).collect(),
                periodic: true,
            });
        }
        return;
    }
    for j in 0..shift.len() {
        if shift.adjacency[last][j] {
            path.push(j);
            collect_cycles(shift, n, path, out);
            path.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> TransitionRule {
        TransitionRule::positive_geodesic()
    }

    #[test]
    fn forbidden_list() {
        let r = a();
        assert!(!is_allowed(&r, 3, 3).unwrap());
        assert!(is_allowed(&r, 4, 4).unwrap());
        assert!(is_allowed(&r, 6, 3).unwrap());
        assert!(is_allowed(&r, 3, 6).unwrap());
        assert!(!is_allowed(&r, 3, 5).unwrap());
        assert!(is_allowed(&r, 5, 4).unwrap());
        assert!(is_allowed(&r, 2, 4).is_err());
        assert_eq!(r.free_from(), 6);
    }

    #[test]
    fn small_truncations() {
        let t4 = truncate(&a(), 4).unwrap();
        assert_eq!(t4.symbols, vec![3, 4]);
        assert_eq!(t4.adjacency, vec![vec![false, false], vec![false, true]]);
        assert!(!t4.irreducible);

        let t5 = truncate(&a(), 5).unwrap();
        assert!(!t5.irreducible);
        let class: Vec<Symbol> =
            t5.recurrent_class().unwrap().iter().map(|&i| t5.symbols[i]).collect();
        assert_eq!(class, vec![4, 5]);

        let t6 = truncate(&a(), 6).unwrap();
        assert!(t6.irreducible && t6.is_aperiodic());
    }

    #[test]
    fn periodic_word_lists() {
        let fb = FiniteShift::full_block(vec![4, 5]);
        let w: Vec<Vec<Symbol>> =
            periodic_words(&fb, 2).unwrap().into_iter().map(|w| w.digits).collect();
        assert_eq!(w, vec![vec![4, 4], vec![4, 5], vec![5, 4], vec![5, 5]]);
        let t4 = truncate(&a(), 4).unwrap();
        assert_eq!(periodic_words(&t4, 1).unwrap().len(), 1);
        let t6 = truncate(&a(), 6).unwrap();
        let d: Vec<Symbol> =
            periodic_words(&t6, 1).unwrap().into_iter().map(|w| w.digits[0]).collect();
        assert_eq!(d, vec![4, 5, 6]);
        assert!(matches!(
            periodic_words(&t6, 40),
            Err(Error::OracleScaleExceeded { .. })
        ));
    }

    #[test]
    fn bip() {
        assert!(check_bip(&a(), &[6]));
        assert!(!check_bip(&a(), &[3]));
        assert!(check_bip(&TransitionRule::full(1), &[1]));
    }

    #[test]
    fn invalid_rules_rejected() {
        assert!(TransitionRule::new(3, [(2, 3)], None).is_err());
        // Symbol 3 would have no successor on the alphabet {3, 4}.
        assert!(TransitionRule::new(3, [(3, 3), (3, 4)], Some(4)).is_err());
    }
}
