use std::collections::BTreeSet;

use crate::ast::Name;

/// Deterministic supply of names that avoid a reserved set.
///
/// Generated names have the shape `stem'N`, which the parser accepts, so
/// printed output stays re-parseable.
#[derive(Debug, Clone)]
pub struct Fresh {
    next: u64,
    used: BTreeSet<Name>,
    canonical: bool,
}

impl Fresh {
    pub fn new(seed: u64) -> Fresh {
        Fresh { next: seed, used: BTreeSet::new(), canonical: false }
    }

    pub fn avoiding<I, S>(seed: u64, names: I) -> Fresh
    where
        I: IntoIterator<Item = S>,
        S: Into<Name>,
    {
        let mut f = Fresh::new(seed);
        f.reserve(names);
        f
    }

    /// A supply producing `%N` names, which cannot clash with parsed identifiers.
    pub(crate) fn canonical() -> Fresh {
        Fresh { next: 0, used: BTreeSet::new(), canonical: true }
    }

    pub(crate) fn is_canonical(&self) -> bool {
        self.canonical
    }

    pub fn reserve<I, S>(&mut self, names: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<Name>,
    {
        self.used.extend(names.into_iter().map(Into::into));
    }

    pub fn is_used(&self, x: &str) -> bool {
        self.used.contains(x)
    }

    pub fn name(&mut self, base: &str) -> Name {
        if self.canonical {
            let n = format!("%{}", self.next);
            self.next += 1;
            return n;
        }
        let stem = stem(base);
        loop {
            let candidate = format!("{stem}'{}", self.next);
            self.next += 1;
            if self.used.insert(candidate.clone()) {
                return candidate;
            }
        }
    }
}

fn stem(base: &str) -> &str {
    let trimmed = base.trim_end_matches(|c: char| c.is_ascii_digit());
    match trimmed.strip_suffix('\'') {
        Some(s) if trimmed.len() < base.len() && !s.is_empty() => s,
        _ => base,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_skip_reserved() {
        let mut f = Fresh::avoiding(0, ["x'0", "x'1"]);
        assert_eq!(f.name("x"), "x'2");
        assert_eq!(f.name("x'2"), "x'3");
    }

    #[test]
    fn stem_keeps_plain_primes() {
        assert_eq!(stem("x'"), "x'");
        assert_eq!(stem("x'12"), "x");
        assert_eq!(stem("a1"), "a1");
    }
}
