use std::collections::BTreeSet;
use std::fmt;

use super::sym::Sym;

/// A role name, its inverse, or the universal role.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Named { name: Sym, inverse: bool },
    Universal,
}

impl Role {
    pub fn named(name: &str) -> Self {
        Role::Named {
            name: Sym::new(name),
            inverse: false,
        }
    }

    pub fn of(name: Sym, inverse: bool) -> Self {
        Role::Named { name, inverse }
    }

    pub fn inv(&self) -> Role {
        match self {
            Role::Named { name, inverse } => Role::Named {
                name: name.clone(),
                inverse: !inverse,
            },
            Role::Universal => Role::Universal,
        }
    }

    pub fn is_universal(&self) -> bool {
        matches!(self, Role::Universal)
    }

    pub fn is_inverse(&self) -> bool {
        matches!(self, Role::Named { inverse: true, .. })
    }

    pub fn name(&self) -> Option<&Sym> {
        match self {
            Role::Named { name, .. } => Some(name),
            Role::Universal => None,
        }
    }
}

impl fmt::Debug for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Named {
                name,
                inverse: false,
            } => write!(f, "{name}"),
            Role::Named {
                name,
                inverse: true,
            } => write!(f, "{name}-"),
            Role::Universal => f.write_str("u"),
        }
    }
}

/// An ALCI concept with the universal role.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Concept {
    Top,
    Bot,
    Name(Sym),
    Not(Box<Concept>),
    And(Box<Concept>, Box<Concept>),
    Or(Box<Concept>, Box<Concept>),
    Exists(Role, Box<Concept>),
    Forall(Role, Box<Concept>),
}

impl Concept {
    pub fn name(s: &str) -> Self {
        Concept::Name(Sym::new(s))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: Concept) -> Self {
        Concept::Not(Box::new(c))
    }

    pub fn and(a: Concept, b: Concept) -> Self {
        Concept::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Concept, b: Concept) -> Self {
        Concept::Or(Box::new(a), Box::new(b))
    }

    /// `a → b`, represented as `¬a ⊔ b`.
    pub fn imp(a: Concept, b: Concept) -> Self {
        Concept::or(Concept::not(a), b)
    }

    pub fn exists(r: Role, c: Concept) -> Self {
        Concept::Exists(r, Box::new(c))
    }

    pub fn forall(r: Role, c: Concept) -> Self {
        Concept::Forall(r, Box::new(c))
    }

    /// Conjunction of all members, `Top` when empty.
    pub fn and_all<I: IntoIterator<Item = Concept>>(items: I) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => Concept::Top,
            Some(first) => it.fold(first, Concept::and),
        }
    }

    /// Disjunction of all members, `Bot` when empty.
    pub fn or_all<I: IntoIterator<Item = Concept>>(items: I) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => Concept::Bot,
            Some(first) => it.fold(first, Concept::or),
        }
    }

    /// Negation normal form: `Not` is applied to concept names only.
    pub fn to_nnf(&self) -> Concept {
        self.nnf(false)
    }

    fn nnf(&self, neg: bool) -> Concept {
        match (self, neg) {
            (Concept::Top, false) | (Concept::Bot, true) => Concept::Top,
            (Concept::Top, true) | (Concept::Bot, false) => Concept::Bot,
            (Concept::Name(_), false) => self.clone(),
            (Concept::Name(_), true) => Concept::not(self.clone()),
            (Concept::Not(c), _) => c.nnf(!neg),
            (Concept::And(a, b), false) => Concept::and(a.nnf(false), b.nnf(false)),
            (Concept::And(a, b), true) => Concept::or(a.nnf(true), b.nnf(true)),
            (Concept::Or(a, b), false) => Concept::or(a.nnf(false), b.nnf(false)),
            (Concept::Or(a, b), true) => Concept::and(a.nnf(true), b.nnf(true)),
            (Concept::Exists(r, c), false) => Concept::exists(r.clone(), c.nnf(false)),
            (Concept::Exists(r, c), true) => Concept::forall(r.clone(), c.nnf(true)),
            (Concept::Forall(r, c), false) => Concept::forall(r.clone(), c.nnf(false)),
            (Concept::Forall(r, c), true) => Concept::exists(r.clone(), c.nnf(true)),
        }
    }

    /// No negation, disjunction, value restriction or universal role.
    pub fn is_eli_bot(&self) -> bool {
        match self {
            Concept::Top | Concept::Bot | Concept::Name(_) => true,
            Concept::And(a, b) => a.is_eli_bot() && b.is_eli_bot(),
            Concept::Exists(r, c) => !r.is_universal() && c.is_eli_bot(),
            Concept::Not(_) | Concept::Or(..) | Concept::Forall(..) => false,
        }
    }

    /// Like [`Concept::is_eli_bot`] but admits the universal role.
    pub fn is_eliu_bot(&self) -> bool {
        match self {
            Concept::Top | Concept::Bot | Concept::Name(_) => true,
            Concept::And(a, b) => a.is_eliu_bot() && b.is_eliu_bot(),
            Concept::Exists(_, c) => c.is_eliu_bot(),
            Concept::Not(_) | Concept::Or(..) | Concept::Forall(..) => false,
        }
    }

    /// Like [`Concept::is_eliu_bot`] but additionally admits disjunction.
    pub fn is_eliu_union_bot(&self) -> bool {
        match self {
            Concept::Top | Concept::Bot | Concept::Name(_) => true,
            Concept::And(a, b) | Concept::Or(a, b) => {
                a.is_eliu_union_bot() && b.is_eliu_union_bot()
            }
            Concept::Exists(_, c) => c.is_eliu_union_bot(),
            Concept::Not(_) | Concept::Forall(..) => false,
        }
    }

    pub fn mentions_bot(&self) -> bool {
        self.any(&mut |c| matches!(c, Concept::Bot))
    }

    pub fn mentions_universal(&self) -> bool {
        self.any(&mut |c| {
            matches!(c, Concept::Exists(Role::Universal, _) | Concept::Forall(Role::Universal, _))
        })
    }

    pub fn mentions_inverse(&self) -> bool {
        self.any(&mut |c| match c {
            Concept::Exists(r, _) | Concept::Forall(r, _) => r.is_inverse(),
            _ => false,
        })
    }

    /// True if `pred` holds for some subconcept (including `self`).
    pub fn any(&self, pred: &mut dyn FnMut(&Concept) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Concept::Top | Concept::Bot | Concept::Name(_) => false,
            Concept::Not(c) | Concept::Exists(_, c) | Concept::Forall(_, c) => c.any(pred),
            Concept::And(a, b) | Concept::Or(a, b) => a.any(pred) || b.any(pred),
        }
    }

    pub fn concept_names(&self, out: &mut BTreeSet<Sym>) {
        match self {
            Concept::Top | Concept::Bot => {}
            Concept::Name(n) => {
                out.insert(n.clone());
            }
            Concept::Not(c) => c.concept_names(out),
            Concept::And(a, b) | Concept::Or(a, b) => {
                a.concept_names(out);
                b.concept_names(out);
            }
            Concept::Exists(_, c) | Concept::Forall(_, c) => c.concept_names(out),
        }
    }

    pub fn role_names(&self, out: &mut BTreeSet<Sym>) {
        match self {
            Concept::Top | Concept::Bot | Concept::Name(_) => {}
            Concept::Not(c) => c.role_names(out),
            Concept::And(a, b) | Concept::Or(a, b) => {
                a.role_names(out);
                b.role_names(out);
            }
            Concept::Exists(r, c) | Concept::Forall(r, c) => {
                if let Some(n) = r.name() {
                    out.insert(n.clone());
                }
                c.role_names(out);
            }
        }
    }

    /// All concept and role names occurring in the concept.
    pub fn signature(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.concept_names(&mut out);
        self.role_names(&mut out);
        out
    }

    /// Nesting depth of quantifiers.
    pub fn role_depth(&self) -> usize {
        match self {
            Concept::Top | Concept::Bot | Concept::Name(_) => 0,
            Concept::Not(c) => c.role_depth(),
            Concept::And(a, b) | Concept::Or(a, b) => a.role_depth().max(b.role_depth()),
            Concept::Exists(_, c) | Concept::Forall(_, c) => 1 + c.role_depth(),
        }
    }

    /// Flattened conjuncts of a conjunction.
    pub fn conjuncts(&self) -> Vec<&Concept> {
        let mut out = Vec::new();
        fn walk<'a>(c: &'a Concept, out: &mut Vec<&'a Concept>) {
            match c {
                Concept::And(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                _ => out.push(c),
            }
        }
        walk(self, &mut out);
        out
    }
}

impl fmt::Debug for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Prints in the parser's concrete syntax with full parenthesization of
/// binary operators, so printing followed by parsing is the identity.
impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Concept::Top => f.write_str("top"),
            Concept::Bot => f.write_str("bot"),
            Concept::Name(n) => write!(f, "{n}"),
            Concept::Not(c) => write!(f, "not {c}"),
            Concept::And(a, b) => write!(f, "({a} and {b})"),
            Concept::Or(a, b) => write!(f, "({a} or {b})"),
            Concept::Exists(r, c) => write!(f, "exists {r}.{c}"),
            Concept::Forall(r, c) => write!(f, "forall {r}.{c}"),
        }
    }
}

/// A concept inclusion `lhs ⊑ rhs`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ci {
    pub lhs: Concept,
    pub rhs: Concept,
}

impl Ci {
    pub fn new(lhs: Concept, rhs: Concept) -> Self {
        Ci { lhs, rhs }
    }

    /// The CI as a concept that must hold everywhere: `¬lhs ⊔ rhs`.
    pub fn internalize(&self) -> Concept {
        match (&self.lhs, &self.rhs) {
            (Concept::Top, rhs) => rhs.clone(),
            (lhs, Concept::Bot) => Concept::not(lhs.clone()),
            (lhs, rhs) => Concept::imp(lhs.clone(), rhs.clone()),
        }
    }
}

impl fmt::Debug for Ci {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} sub {}", self.lhs, self.rhs)
    }
}

impl fmt::Display for Ci {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} sub {}", self.lhs, self.rhs)
    }
}

/// Description-logic fragments, from most to least specific.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dialect {
    Eli,
    EliBot,
    EliuBot,
    EliuUnionBot,
    Alc,
    Alci,
}

impl Dialect {
    pub fn label(self) -> &'static str {
        match self {
            Dialect::Eli => "ELI",
            Dialect::EliBot => "ELI_bot",
            Dialect::EliuBot => "ELIu_bot",
            Dialect::EliuUnionBot => "ELIU_bot",
            Dialect::Alc => "ALC",
            Dialect::Alci => "ALCI",
        }
    }

    /// Horn fragments without disjunction or negation.
    pub fn is_horn(self) -> bool {
        matches!(self, Dialect::Eli | Dialect::EliBot | Dialect::EliuBot)
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A finite set of concept inclusions, kept in input order.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Ontology {
    pub cis: Vec<Ci>,
}

impl Ontology {
    pub fn new(cis: Vec<Ci>) -> Self {
        Ontology { cis }
    }

    pub fn is_empty(&self) -> bool {
        self.cis.is_empty()
    }

    pub fn dialect(&self) -> Dialect {
        classify_dialect(self)
    }

    pub fn signature(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        for ci in &self.cis {
            ci.lhs.concept_names(&mut out);
            ci.rhs.concept_names(&mut out);
            ci.lhs.role_names(&mut out);
            ci.rhs.role_names(&mut out);
        }
        out
    }

    pub fn concept_names(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        for ci in &self.cis {
            ci.lhs.concept_names(&mut out);
            ci.rhs.concept_names(&mut out);
        }
        out
    }

    pub fn role_names(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        for ci in &self.cis {
            ci.lhs.role_names(&mut out);
            ci.rhs.role_names(&mut out);
        }
        out
    }

    pub fn role_depth(&self) -> usize {
        self.cis
            .iter()
            .map(|ci| ci.lhs.role_depth().max(ci.rhs.role_depth()))
            .max()
            .unwrap_or(0)
    }

    /// Concepts that must hold at every element.
    pub fn internalized(&self) -> Vec<Concept> {
        self.cis.iter().map(Ci::internalize).collect()
    }
}

impl fmt::Debug for Ontology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.cis).finish()
    }
}

fn ci_fits(ci: &Ci, dialect: Dialect) -> bool {
    let both = |p: fn(&Concept) -> bool| p(&ci.lhs) && p(&ci.rhs);
    // In the Horn fragments bottom may only be a whole right-hand side.
    let bot_ok = (!ci.lhs.mentions_bot() || ci.lhs == Concept::Bot)
        && (!ci.rhs.mentions_bot() || ci.rhs == Concept::Bot);
    match dialect {
        Dialect::Eli => {
            both(Concept::is_eli_bot) && !ci.lhs.mentions_bot() && !ci.rhs.mentions_bot()
        }
        Dialect::EliBot => both(Concept::is_eli_bot) && bot_ok,
        Dialect::EliuBot => both(Concept::is_eliu_bot) && bot_ok,
        Dialect::EliuUnionBot => both(Concept::is_eliu_union_bot),
        Dialect::Alc => !ci.lhs.mentions_universal()
            && !ci.rhs.mentions_universal()
            && !ci.lhs.mentions_inverse()
            && !ci.rhs.mentions_inverse(),
        Dialect::Alci => true,
    }
}

/// The most specific fragment that admits every CI.
pub fn classify_dialect(o: &Ontology) -> Dialect {
    [
        Dialect::Eli,
        Dialect::EliBot,
        Dialect::EliuBot,
        Dialect::EliuUnionBot,
        Dialect::Alc,
    ]
    .into_iter()
    .find(|d| o.cis.iter().all(|ci| ci_fits(ci, *d)))
    .unwrap_or(Dialect::Alci)
}
