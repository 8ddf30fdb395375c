//! The modal language: signatures, formulas, a parser and a printer.
//!
//! The core syntax is `T`, atoms, negation, conjunction and boxes. The
//! parser also accepts `F`, `|`, `->` and diamonds `<i>`, which are
//! rewritten into the core connectives on the way in:
//!
//! ```text
//! F        ~T
//! (a | b)  ~(~a & ~b)
//! (a -> b) ~(a & ~b)
//! <i>a     ~[i]~a
//! ```
//!
//! Binary connectives always carry parentheses, so there is no precedence.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// A finite vocabulary of atoms and agents.
#[derive(Clone)]
pub struct Signature {
    atoms: Vec<String>,
    agents: Vec<String>,
    atom_index: HashMap<String, usize>,
    agent_index: HashMap<String, usize>,
}

impl Signature {
    pub fn new<A, B>(atoms: A, agents: B) -> Result<Self>
    where
        A: IntoIterator,
        A::Item: Into<String>,
        B: IntoIterator,
        B::Item: Into<String>,
    {
        let atoms: Vec<String> = atoms.into_iter().map(Into::into).collect();
        let agents: Vec<String> = agents.into_iter().map(Into::into).collect();
        if agents.is_empty() {
            return Err(Error::InvalidSignature("at least one agent is required".into()));
        }
        let atom_index = index_names(&atoms, "atom")?;
        let agent_index = index_names(&agents, "agent")?;
        Ok(Signature {
            atoms,
            agents,
            atom_index,
            agent_index,
        })
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn atom_index(&self, name: &str) -> Option<usize> {
        self.atom_index.get(name).copied()
    }

    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agent_index.get(name).copied()
    }

    /// Same atoms and agents, possibly in a different order.
    pub fn same_vocabulary(&self, other: &Signature) -> bool {
        self.atoms.len() == other.atoms.len()
            && self.agents.len() == other.agents.len()
            && self.atoms.iter().all(|a| other.atom_index.contains_key(a))
            && self.agents.iter().all(|a| other.agent_index.contains_key(a))
    }
}

impl PartialEq for Signature {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms && self.agents == other.agents
    }
}

impl Eq for Signature {}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Signature")
            .field("atoms", &self.atoms)
            .field("agents", &self.agents)
            .finish()
    }
}

fn index_names(names: &[String], what: &str) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(names.len());
    for (i, name) in names.iter().enumerate() {
        if !is_identifier(name) {
            return Err(Error::InvalidSignature(format!("`{name}` is not a valid {what} name")));
        }
        if index.insert(name.clone(), i).is_some() {
            return Err(Error::InvalidSignature(format!("duplicate {what} `{name}`")));
        }
    }
    Ok(index)
}

/// `[a-z][a-z0-9_]*`
pub fn is_identifier(name: &str) -> bool {
    let mut bytes = name.bytes();
    matches!(bytes.next(), Some(b'a'..=b'z'))
        && bytes.all(|b| matches!(b, b'a'..=b'z' | b'0'..=b'9' | b'_'))
}

/// A formula in core syntax.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Top,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    /// `[agent]φ`
    Box(String, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    pub fn bot() -> Formula {
        Formula::negate(Formula::Top)
    }

    pub fn negate(inner: Formula) -> Formula {
        Formula::Not(Box::new(inner))
    }

    pub fn and(left: Formula, right: Formula) -> Formula {
        Formula::And(Box::new(left), Box::new(right))
    }

    pub fn or(left: Formula, right: Formula) -> Formula {
        Formula::negate(Formula::and(Formula::negate(left), Formula::negate(right)))
    }

    pub fn implies(left: Formula, right: Formula) -> Formula {
        Formula::negate(Formula::and(left, Formula::negate(right)))
    }

    pub fn boxed(agent: impl Into<String>, inner: Formula) -> Formula {
        Formula::Box(agent.into(), Box::new(inner))
    }

    pub fn diamond(agent: impl Into<String>, inner: Formula) -> Formula {
        Formula::negate(Formula::boxed(agent, Formula::negate(inner)))
    }

    /// Right-nested conjunction; `T` when empty.
    pub fn conj<I: IntoIterator<Item = Formula>>(parts: I) -> Formula {
        let mut parts: Vec<Formula> = parts.into_iter().collect();
        let Some(mut acc) = parts.pop() else {
            return Formula::Top;
        };
        while let Some(next) = parts.pop() {
            acc = Formula::and(next, acc);
        }
        acc
    }

    /// Disjunction via De Morgan; `F` when empty.
    pub fn disj<I: IntoIterator<Item = Formula>>(parts: I) -> Formula {
        let parts: Vec<Formula> = parts.into_iter().collect();
        if parts.len() == 1 {
            return parts.into_iter().next().unwrap();
        }
        Formula::negate(Formula::conj(parts.into_iter().map(Formula::negate)))
    }

    /// Parse and check every atom and agent against `sig`.
    pub fn parse(text: &str, sig: &Signature) -> Result<Formula> {
        let formula = parse_formula(text)?;
        formula.check(sig)?;
        Ok(formula)
    }

    pub fn check(&self, sig: &Signature) -> Result<()> {
        match self {
            Formula::Top => Ok(()),
            Formula::Atom(p) => match sig.atom_index(p) {
                Some(_) => Ok(()),
                None => Err(Error::UnknownAtom(p.clone())),
            },
            Formula::Not(inner) => inner.check(sig),
            Formula::And(l, r) => {
                l.check(sig)?;
                r.check(sig)
            }
            Formula::Box(i, inner) => match sig.agent_index(i) {
                Some(_) => inner.check(sig),
                None => Err(Error::UnknownAgent(i.clone())),
            },
        }
    }

    pub fn render(&self) -> String {
        self.to_string()
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Top | Formula::Atom(_) => 0,
            Formula::Not(inner) => inner.modal_depth(),
            Formula::And(l, r) => l.modal_depth().max(r.modal_depth()),
            Formula::Box(_, inner) => 1 + inner.modal_depth(),
        }
    }

    pub fn is_boolean(&self) -> bool {
        self.modal_depth() == 0
    }

    /// `T`, or a conjunction whose leaves are atoms or negated atoms.
    pub fn is_conjunctive_clause(&self) -> bool {
        self == &Formula::Top || self.literals().is_some()
    }

    /// The literals of a conjunctive clause as `(atom, polarity)` pairs, or
    /// `None` if this is not a clause. `T` has no literals.
    pub fn literals(&self) -> Option<Vec<(&str, bool)>> {
        fn collect<'a>(f: &'a Formula, out: &mut Vec<(&'a str, bool)>) -> bool {
            match f {
                Formula::Atom(p) => {
                    out.push((p, true));
                    true
                }
                Formula::Not(inner) => match inner.as_ref() {
                    Formula::Atom(p) => {
                        out.push((p, false));
                        true
                    }
                    _ => false,
                },
                Formula::And(l, r) => collect(l, out) && collect(r, out),
                _ => false,
            }
        }
        if self == &Formula::Top {
            return Some(Vec::new());
        }
        let mut out = Vec::new();
        collect(self, &mut out).then_some(out)
    }

    /// Number of nodes in the syntax tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::Top | Formula::Atom(_) => 1,
            Formula::Not(inner) | Formula::Box(_, inner) => 1 + inner.size(),
            Formula::And(l, r) => 1 + l.size() + r.size(),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Top => f.write_str("T"),
            Formula::Atom(p) => f.write_str(p),
            Formula::Not(inner) => write!(f, "~{inner}"),
            Formula::And(l, r) => write!(f, "({l} & {r})"),
            Formula::Box(i, inner) => write!(f, "[{i}]{inner}"),
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_formula(s)
    }
}

/// Parse without a signature check.
pub fn parse_formula(text: &str) -> Result<Formula> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let formula = parser.formula()?;
    parser.skip_ws();
    if parser.pos != parser.src.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(formula)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            pos: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            Ok(())
        } else {
            Err(self.error(format!("expected `{token}`")))
        }
    }

    fn identifier(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        if !matches!(self.src.get(self.pos), Some(b'a'..=b'z')) {
            return Err(self.error("expected an identifier"));
        }
        self.pos += 1;
        while matches!(self.src.get(self.pos), Some(b'a'..=b'z' | b'0'..=b'9' | b'_')) {
            self.pos += 1;
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn formula(&mut self) -> Result<Formula> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'T') => {
                self.pos += 1;
                Ok(Formula::Top)
            }
            Some(b'F') => {
                self.pos += 1;
                Ok(Formula::bot())
            }
            Some(b'~') => {
                self.pos += 1;
                Ok(Formula::negate(self.formula()?))
            }
            Some(b'[') => {
                self.pos += 1;
                let agent = self.identifier()?;
                self.expect("]")?;
                Ok(Formula::boxed(agent, self.formula()?))
            }
            Some(b'<') => {
                self.pos += 1;
                let agent = self.identifier()?;
                self.expect(">")?;
                Ok(Formula::diamond(agent, self.formula()?))
            }
            Some(b'(') => {
                self.pos += 1;
                let left = self.formula()?;
                let result = match self.peek() {
                    Some(b'&') => {
                        self.pos += 1;
                        Formula::and(left, self.formula()?)
                    }
                    Some(b'|') => {
                        self.pos += 1;
                        Formula::or(left, self.formula()?)
                    }
                    Some(b'-') => {
                        self.expect("->")?;
                        Formula::implies(left, self.formula()?)
                    }
                    _ => return Err(self.error("expected `&`, `|` or `->`")),
                };
                self.expect(")")?;
                Ok(result)
            }
            Some(b'a'..=b'z') => Ok(Formula::Atom(self.identifier()?)),
            Some(c) => Err(self.error(format!("unexpected character `{}`", c as char))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sig() -> Signature {
        Signature::new(["p", "q", "u", "e", "p1"], ["a", "b"]).unwrap()
    }

    fn p(name: &str) -> Formula {
        Formula::atom(name)
    }

    #[test]
    fn parses_box_of_conjunction() {
        let f = Formula::parse("[a](p & ~q)", &sig()).unwrap();
        assert_eq!(f, Formula::boxed("a", Formula::and(p("p"), Formula::negate(p("q")))));
    }

    #[test]
    fn parses_nested_diamonds() {
        let f = Formula::parse("<a>(u & <b>(e & p1))", &sig()).unwrap();
        let inner = Formula::negate(Formula::Box(
            "b".into(),
            Box::new(Formula::negate(Formula::and(p("e"), p("p1")))),
        ));
        let expected = Formula::negate(Formula::boxed(
            "a",
            Formula::negate(Formula::and(p("u"), inner)),
        ));
        assert_eq!(f, expected);
        assert_eq!(f.modal_depth(), 2);
    }

    #[test]
    fn parses_constants_and_sugar() {
        assert_eq!(Formula::parse("T", &sig()).unwrap(), Formula::Top);
        assert_eq!(Formula::parse(" F ", &sig()).unwrap(), Formula::bot());
        assert_eq!(
            Formula::parse("(p | q)", &sig()).unwrap(),
            Formula::negate(Formula::and(Formula::negate(p("p")), Formula::negate(p("q"))))
        );
        assert_eq!(
            Formula::parse("(p -> q)", &sig()).unwrap(),
            Formula::negate(Formula::and(p("p"), Formula::negate(p("q"))))
        );
    }

    #[test]
    fn reports_syntax_errors_with_position() {
        match parse_formula("(p & q") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_formula("p & q"), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse_formula("[A]p"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_formula(""), Err(Error::Syntax { .. })));
    }

    #[test]
    fn rejects_unknown_names() {
        assert_eq!(Formula::parse("r", &sig()), Err(Error::UnknownAtom("r".into())));
        assert_eq!(Formula::parse("[c]p", &sig()), Err(Error::UnknownAgent("c".into())));
    }

    #[test]
    fn renders_core_syntax() {
        assert_eq!(Formula::Top.render(), "T");
        assert_eq!(Formula::boxed("a", p("p")).render(), "[a]p");
        assert_eq!(Formula::and(p("p"), Formula::negate(p("q"))).render(), "(p & ~q)");
    }

    #[test]
    fn structural_predicates() {
        let s = sig();
        let f = |t: &str| Formula::parse(t, &s).unwrap();
        assert_eq!(f("(p & ~q)").modal_depth(), 0);
        assert_eq!(f("[a]p").modal_depth(), 1);
        assert!(f("(p & ~q)").is_boolean());
        assert!(!f("[a]p").is_boolean());
        assert!(f("T").is_boolean());
        assert!(f("(p & ~q)").is_conjunctive_clause());
        assert!(!f("~(p & q)").is_conjunctive_clause());
        assert!(f("T").is_conjunctive_clause());
        assert!(!f("(p & T)").is_conjunctive_clause());
        assert!(!f("~~p").is_conjunctive_clause());
    }

    #[test]
    fn signature_validation() {
        assert!(Signature::new(["p"], Vec::<String>::new()).is_err());
        assert!(Signature::new(["p", "p"], ["a"]).is_err());
        assert!(Signature::new(["P"], ["a"]).is_err());
        assert!(Signature::new(Vec::<String>::new(), ["a"]).is_ok());
        let a = Signature::new(["p", "q"], ["a"]).unwrap();
        let b = Signature::new(["q", "p"], ["a"]).unwrap();
        assert_ne!(a, b);
        assert!(a.same_vocabulary(&b));
    }

    pub(crate) fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            Just(Formula::Top),
            prop::sample::select(vec!["p", "q", "p1"]).prop_map(Formula::atom),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::negate),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
                (prop::sample::select(vec!["a", "b"]), inner).prop_map(|(i, f)| Formula::boxed(i, f)),
            ]
        })
    }

    proptest! {
        #[test]
        fn render_then_parse_round_trips(f in arb_formula()) {
            prop_assert_eq!(Formula::parse(&f.render(), &sig()).unwrap(), f);
        }

        #[test]
        fn depth_is_compositional(f in arb_formula(), g in arb_formula()) {
            prop_assert_eq!(Formula::negate(f.clone()).modal_depth(), f.modal_depth());
            prop_assert_eq!(
                Formula::and(f.clone(), g.clone()).modal_depth(),
                f.modal_depth().max(g.modal_depth())
            );
        }
    }
}
