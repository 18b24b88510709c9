use std::collections::BTreeSet;

use super::{for_each_tuple, Operation};

/// A side of a linear identity: a variable or one symbol applied to variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    App { symbol: usize, args: Vec<usize> },
}

impl Term {
    fn vars(&self) -> BTreeSet<usize> {
        match self {
            Term::Var(x) => BTreeSet::from([*x]),
            Term::App { args, .. } => args.iter().copied().collect(),
        }
    }

    fn eval(&self, ops: &[&Operation], val: &[usize]) -> usize {
        match self {
            Term::Var(x) => val[*x],
            Term::App { symbol, args } => {
                let a: Vec<usize> = args.iter().map(|&x| val[x]).collect();
                ops[*symbol].apply(&a)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Identity {
    pub lhs: Term,
    pub rhs: Term,
}

impl Identity {
    pub fn is_balanced(&self) -> bool {
        self.lhs.vars() == self.rhs.vars()
    }

    fn var_count(&self) -> usize {
        self.lhs.vars().union(&self.rhs.vars()).max().map_or(0, |&x| x + 1)
    }
}

/// Linear identities over symbols `0..arities.len()`. Linearity holds by
/// construction of [`Term`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentitySet {
    pub arities: Vec<usize>,
    pub identities: Vec<Identity>,
}

impl IdentitySet {
    pub fn is_balanced(&self) -> bool {
        self.identities.iter().all(Identity::is_balanced)
    }

    /// Contains `f(x, …, x) = x` for some symbol.
    pub fn is_idempotent(&self) -> bool {
        self.identities.iter().any(
            |id| matches!((&id.lhs, &id.rhs), (Term::App { args, .. }, Term::Var(x)) if args.iter().all(|a| a == x)),
        )
    }
}

/// A failing instantiation: the identity index and the variable values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityFailure {
    pub identity: usize,
    pub valuation: Vec<usize>,
}

/// Checks every identity of `sigma` under every valuation, interpreting
/// symbol `s` as `ops[s]`.
pub fn check_identities(ops: &[&Operation], sigma: &IdentitySet) -> Result<(), IdentityFailure> {
    assert_eq!(ops.len(), sigma.arities.len(), "one operation per symbol");
    for (s, op) in ops.iter().enumerate() {
        assert_eq!(op.arity(), sigma.arities[s], "arity of symbol {s}");
    }
    let size = ops.first().map_or(0, |f| f.size());
    for (i, id) in sigma.identities.iter().enumerate() {
        let mut failure = None;
        for_each_tuple(size, id.var_count(), |val| {
            if id.lhs.eval(ops, val) == id.rhs.eval(ops, val) {
                true
            } else {
                failure = Some(val.to_vec());
                false
            }
        });
        if let Some(valuation) = failure {
            return Err(IdentityFailure { identity: i, valuation });
        }
    }
    Ok(())
}

/// Built-in single-symbol identity families for a `k`-ary operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Template {
    Idempotent,
    /// `f(y,x,…,x) = f(x,y,…,x) = … = f(x,…,x,y)`.
    Wnu,
    Cyclic,
    Symmetric,
}

impl Template {
    pub const ALL: [Template; 4] = [Template::Idempotent, Template::Wnu, Template::Cyclic, Template::Symmetric];

    pub fn name(self) -> &'static str {
        match self {
            Template::Idempotent => "idempotent",
            Template::Wnu => "wnu",
            Template::Cyclic => "cyclic",
            Template::Symmetric => "symmetric",
        }
    }

    pub fn identities(self, k: usize) -> IdentitySet {
        let app = |args: Vec<usize>| Term::App { symbol: 0, args };
        let identities = match self {
            Template::Idempotent => vec![Identity { lhs: app(vec![0; k]), rhs: Term::Var(0) }],
            Template::Wnu => {
                let at = |j: usize| app((0..k).map(|i| usize::from(i == j)).collect());
                (1..k).map(|j| Identity { lhs: at(0), rhs: at(j) }).collect()
            }
            Template::Cyclic => {
                vec![Identity { lhs: app((0..k).collect()), rhs: app((0..k).map(|i| (i + 1) % k).collect()) }]
            }
            // Adjacent transpositions generate every permutation.
            Template::Symmetric => (0..k.saturating_sub(1))
                .map(|j| {
                    let mut swapped: Vec<usize> = (0..k).collect();
                    swapped.swap(j, j + 1);
                    Identity { lhs: app((0..k).collect()), rhs: app(swapped) }
                })
                .collect(),
        };
        IdentitySet { arities: vec![k], identities }
    }
}

/// Templates that `f` satisfies.
pub fn satisfied_templates(f: &Operation) -> Vec<Template> {
    Template::ALL.into_iter().filter(|t| check_identities(&[f], &t.identities(f.arity())).is_ok()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_is_symmetric() {
        let max = Operation::from_fn(2, 2, |x| x[0].max(x[1]));
        assert!(check_identities(&[&max], &Template::Symmetric.identities(2)).is_ok());
    }

    #[test]
    fn first_projection_is_not_wnu() {
        let pr = Operation::projection(2, 2, 0);
        let err = check_identities(&[&pr], &Template::Wnu.identities(2)).unwrap_err();
        assert_eq!(err.valuation, vec![0, 1]);
    }

    #[test]
    fn meet_and_join_satisfy_balanced_commutativity() {
        let meet = Operation::from_fn(2, 2, |x| x[0].min(x[1]));
        let join = Operation::from_fn(2, 2, |x| x[0].max(x[1]));
        let comm = |s| Identity {
            lhs: Term::App { symbol: s, args: vec![0, 1] },
            rhs: Term::App { symbol: s, args: vec![1, 0] },
        };
        let sigma = IdentitySet { arities: vec![2, 2], identities: vec![comm(0), comm(1)] };
        assert!(sigma.is_balanced());
        assert!(check_identities(&[&meet, &join], &sigma).is_ok());
    }

    #[test]
    fn idempotency_is_balanced_and_flagged() {
        let sigma = Template::Idempotent.identities(3);
        assert!(sigma.is_balanced());
        assert!(sigma.is_idempotent());
        assert!(!Template::Cyclic.identities(3).is_idempotent());
    }

    #[test]
    fn ternary_majority_templates() {
        let maj = Operation::from_fn(3, 2, |x| usize::from(x.iter().sum::<usize>() >= 2));
        assert_eq!(satisfied_templates(&maj), Template::ALL.to_vec());
    }

    #[test]
    fn cyclic_but_not_symmetric() {
        // Rotations of (0,1,2) are fixed, its reversal is not.
        let f = Operation::from_fn(3, 3, |x| {
            let rot = (0..3).map(|s| [x[s], x[(s + 1) % 3], x[(s + 2) % 3]]).min().unwrap();
            usize::from(rot == [0, 1, 2])
        });
        let got = satisfied_templates(&f);
        assert!(got.contains(&Template::Cyclic));
        assert!(!got.contains(&Template::Symmetric));
    }
}
