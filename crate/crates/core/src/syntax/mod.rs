//! Text formats for ontologies, databases, queries and TGD sets.
//!
//! Ontology: one `C sub D` per line, with concepts built from `top`, `bot`,
//! names, `not`, `and`, `or`, `imp`, `exists R.C` and `forall R.C`; a role
//! is a name, a name followed by `-` (inverse), or `u`. Precedence from
//! loosest to tightest: `imp` (right associative), `or`, `and`, prefix
//! operators. Databases list one fact `A(a)` or `r(a,b)` per line.
//! Queries are rules `q(x) :- r(x,y), A(y).`; several rules form a UCQ.
//! TGDs are lines `body -> head` with `false` as the head of a denial.
//! `#` starts a comment.

mod lexer;

use std::collections::{BTreeMap, BTreeSet};

use lexer::{lex, Tok, Token};

use crate::error::{Error, Result, SourceSpan};
use crate::kernel::{Atom, Ci, Concept, Cq, Database, Ontology, Role, Sym, Tgd, Ucq, TOP_NAME};

const KEYWORDS: &[&str] = &[
    "top", "bot", "not", "and", "or", "imp", "exists", "forall", "sub", "u", "false",
];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Arity of each predicate, fixed by its first use.
    arity: BTreeMap<String, (usize, SourceSpan)>,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            arity: BTreeMap::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, what: &str) -> Result<T> {
        Err(Error::parse(
            self.span(),
            format!("expected {what}, found {}", self.peek().describe()),
        ))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            self.error(what)
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn skip_newlines(&mut self) {
        while *self.peek() == Tok::Newline {
            self.bump();
        }
    }

    fn at_line_end(&self) -> bool {
        matches!(self.peek(), Tok::Newline | Tok::Eof)
    }

    fn end_line(&mut self) -> Result<()> {
        if self.at_line_end() {
            self.bump();
            Ok(())
        } else {
            self.error("end of line")
        }
    }

    /// A non-keyword identifier.
    fn name(&mut self, what: &str) -> Result<(Sym, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "u" => Err(Error::parse(
                self.span(),
                "universal role 'u' may only follow exists or forall",
            )),
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let t = self.bump();
                Ok((Sym::from(s), t.span))
            }
            _ => self.error(what),
        }
    }

    /// Terms live only inside atom argument lists, so keywords are fine.
    fn term(&mut self) -> Result<Sym> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(Sym::from(s))
            }
            _ => self.error("a term"),
        }
    }

    fn check_arity(&mut self, pred: &str, n: usize, span: SourceSpan) -> Result<()> {
        match self.arity.get(pred) {
            Some(&(m, first)) if m != n => Err(Error::parse(
                span,
                format!("'{pred}' used with arity {n} but with arity {m} at {first}"),
            )),
            Some(_) => Ok(()),
            None => {
                self.arity.insert(pred.to_string(), (n, span));
                Ok(())
            }
        }
    }

    // Concepts.

    fn concept(&mut self) -> Result<Concept> {
        let lhs = self.disjunction()?;
        if self.is_keyword("imp") {
            self.bump();
            let rhs = self.concept()?;
            return Ok(Concept::imp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Concept> {
        let mut c = self.conjunction()?;
        while self.is_keyword("or") {
            self.bump();
            let d = self.conjunction()?;
            c = Concept::or(c, d);
        }
        Ok(c)
    }

    fn conjunction(&mut self) -> Result<Concept> {
        let mut c = self.prefix()?;
        while self.is_keyword("and") {
            self.bump();
            let d = self.prefix()?;
            c = Concept::and(c, d);
        }
        Ok(c)
    }

    fn prefix(&mut self) -> Result<Concept> {
        if self.is_keyword("not") {
            self.bump();
            return Ok(Concept::not(self.prefix()?));
        }
        for (kw, exists) in [("exists", true), ("forall", false)] {
            if self.is_keyword(kw) {
                self.bump();
                let r = self.role()?;
                self.expect(Tok::Dot, "'.' after the role")?;
                let c = self.prefix()?;
                return Ok(if exists {
                    Concept::exists(r, c)
                } else {
                    Concept::forall(r, c)
                });
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Concept> {
        if self.is_keyword("top") {
            self.bump();
            return Ok(Concept::Top);
        }
        if self.is_keyword("bot") {
            self.bump();
            return Ok(Concept::Bot);
        }
        if *self.peek() == Tok::LParen {
            self.bump();
            let c = self.concept()?;
            self.expect(Tok::RParen, "')'")?;
            return Ok(c);
        }
        let (n, span) = self.name("a concept")?;
        self.check_arity(n.as_str(), 1, span)?;
        Ok(Concept::Name(n))
    }

    fn role(&mut self) -> Result<Role> {
        if self.is_keyword("u") {
            self.bump();
            return Ok(Role::Universal);
        }
        let (n, span) = self.name("a role")?;
        self.check_arity(n.as_str(), 2, span)?;
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Role::of(n, true));
        }
        Ok(Role::of(n, false))
    }

    // Atoms shared by databases, queries and TGDs.

    fn atom(&mut self) -> Result<Atom> {
        let pspan = self.span();
        let pred = match self.peek().clone() {
            Tok::Ident(s) if s == TOP_NAME => {
                self.bump();
                Sym::from(s)
            }
            _ => self.name("a predicate")?.0,
        };
        self.expect(Tok::LParen, "'('")?;
        let mut args = vec![self.term()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.term()?);
        }
        self.expect(Tok::RParen, "')'")?;
        if args.len() > 2 {
            return Err(Error::parse(pspan, "predicates are unary or binary"));
        }
        if pred.as_str() == TOP_NAME && args.len() != 1 {
            return Err(Error::parse(pspan, "'top' is unary"));
        }
        self.check_arity(pred.as_str(), args.len(), pspan)?;
        let mut it = args.into_iter();
        let a = it.next().expect("one argument");
        Ok(match it.next() {
            None => Atom::Concept(pred, a),
            Some(b) => Atom::Role(pred, a, b),
        })
    }

    fn atom_list(&mut self) -> Result<BTreeSet<Atom>> {
        let mut atoms = BTreeSet::new();
        atoms.insert(self.atom()?);
        while *self.peek() == Tok::Comma {
            self.bump();
            atoms.insert(self.atom()?);
        }
        Ok(atoms)
    }
}

pub fn parse_concept(text: &str) -> Result<Concept> {
    let mut p = Parser::new(text)?;
    p.skip_newlines();
    let c = p.concept()?;
    p.skip_newlines();
    if *p.peek() != Tok::Eof {
        return p.error("end of input");
    }
    Ok(c)
}

pub fn parse_ontology(text: &str) -> Result<Ontology> {
    let mut p = Parser::new(text)?;
    let mut cis = Vec::new();
    loop {
        p.skip_newlines();
        if *p.peek() == Tok::Eof {
            break;
        }
        let lhs = p.concept()?;
        if !p.is_keyword("sub") {
            return p.error("'sub'");
        }
        p.bump();
        let rhs = p.concept()?;
        p.end_line()?;
        cis.push(Ci::new(lhs, rhs));
    }
    Ok(Ontology::new(cis))
}

pub fn parse_database(text: &str) -> Result<Database> {
    let mut p = Parser::new(text)?;
    let mut db = Database::new();
    loop {
        p.skip_newlines();
        if *p.peek() == Tok::Eof {
            break;
        }
        db.insert(p.atom()?);
        if *p.peek() == Tok::Dot {
            p.bump();
        }
        p.end_line()?;
    }
    Ok(db)
}

pub fn parse_query(text: &str) -> Result<Ucq> {
    let mut p = Parser::new(text)?;
    let mut rules = Vec::new();
    loop {
        p.skip_newlines();
        if *p.peek() == Tok::Eof {
            break;
        }
        let span = p.span();
        p.name("a rule head")?;
        p.expect(Tok::LParen, "'('")?;
        let mut answer = Vec::new();
        if *p.peek() != Tok::RParen {
            answer.push(p.term()?);
            while *p.peek() == Tok::Comma {
                p.bump();
                answer.push(p.term()?);
            }
        }
        p.expect(Tok::RParen, "')'")?;
        p.skip_newlines();
        p.expect(Tok::Turnstile, "':-'")?;
        p.skip_newlines();
        let mut atoms = BTreeSet::from([p.atom()?]);
        loop {
            p.skip_newlines();
            if *p.peek() != Tok::Comma {
                break;
            }
            p.bump();
            p.skip_newlines();
            atoms.insert(p.atom()?);
        }
        p.expect(Tok::Dot, "'.' ending the rule")?;
        let q = Cq::new(answer, atoms).map_err(|e| Error::parse(span, e.to_string()))?;
        if rules.first().is_some_and(|first: &Cq| first.answer != q.answer) {
            return Err(Error::parse(span, "rules have different head variables"));
        }
        rules.push(q);
    }
    if rules.is_empty() {
        return Err(Error::parse(p.span(), "expected at least one rule"));
    }
    Ucq::new(rules)
}

pub fn parse_tgds(text: &str) -> Result<Vec<Tgd>> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    loop {
        p.skip_newlines();
        if *p.peek() == Tok::Eof {
            break;
        }
        let body = p.atom_list()?;
        p.expect(Tok::Arrow, "'->'")?;
        let head = if p.is_keyword("false") {
            p.bump();
            None
        } else {
            Some(p.atom_list()?)
        };
        p.end_line()?;
        out.push(Tgd::new(body, head));
    }
    Ok(out)
}

pub fn print_ontology(o: &Ontology) -> String {
    o.cis.iter().map(|ci| format!("{ci}\n")).collect()
}

pub fn print_database(d: &Database) -> String {
    d.facts().iter().map(|f| format!("{f}\n")).collect()
}

pub fn print_query(q: &Ucq) -> String {
    q.disjuncts.iter().map(|cq| format!("{cq}\n")).collect()
}

pub fn print_tgds(tgds: &[Tgd]) -> String {
    tgds.iter().map(|t| format!("{t}\n")).collect()
}

#[cfg(test)]
mod tests;
