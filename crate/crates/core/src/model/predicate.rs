//! CNF predicates over a single table.
//!
//! A predicate is a conjunction of clauses, each clause a non-empty
//! disjunction of terms `<column op value>` or `<column op column>`. The
//! empty conjunction is the always-true predicate.
//!
//! The text form accepted by [`CnfPredicate::parse`] is what `Display`
//! writes: `(a = 1 OR b < 2) AND c >= 2020-01-01 AND metric = 'cpu'`.
//! Text literals are single-quoted (`''` escapes a quote); an unquoted
//! right-hand side naming a column is a column-vs-column term.

use std::cmp::Ordering;
use std::fmt;

use super::schema::{TableSchema, Tuple};
use super::value::{Value, ValueKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Ge,
    Le,
    Gt,
    Lt,
}

impl CmpOp {
    pub const ALL: [CmpOp; 6] = [CmpOp::Eq, CmpOp::Ne, CmpOp::Ge, CmpOp::Le, CmpOp::Gt, CmpOp::Lt];

    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Ne => ord != Ordering::Equal,
            CmpOp::Ge => ord != Ordering::Less,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Gt => ord == Ordering::Greater,
            CmpOp::Lt => ord == Ordering::Less,
        }
    }

    /// Applies the operator to `lhs op rhs`.
    pub fn eval(self, lhs: &Value, rhs: &Value) -> bool {
        self.holds(lhs.cmp(rhs))
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Ge => ">=",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Lt => "<",
        }
    }

    fn from_symbol(s: &str) -> Option<CmpOp> {
        Some(match s {
            "=" | "==" => CmpOp::Eq,
            "!=" | "<>" => CmpOp::Ne,
            ">=" => CmpOp::Ge,
            "<=" => CmpOp::Le,
            ">" => CmpOp::Gt,
            "<" => CmpOp::Lt,
            _ => return None,
        })
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operand {
    Value(Value),
    Column(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub column: String,
    pub op: CmpOp,
    pub rhs: Operand,
}

impl Term {
    pub fn value(column: impl Into<String>, op: CmpOp, v: impl Into<Value>) -> Term {
        Term {
            column: column.into(),
            op,
            rhs: Operand::Value(v.into()),
        }
    }

    pub fn columns(column: impl Into<String>, op: CmpOp, other: impl Into<String>) -> Term {
        Term {
            column: column.into(),
            op,
            rhs: Operand::Column(other.into()),
        }
    }

    pub fn is_column_column(&self) -> bool {
        matches!(self.rhs, Operand::Column(_))
    }

    /// Every column name the term reads.
    pub fn referenced_columns(&self) -> impl Iterator<Item = &str> {
        let rhs = match &self.rhs {
            Operand::Column(c) => Some(c.as_str()),
            Operand::Value(_) => None,
        };
        std::iter::once(self.column.as_str()).chain(rhs)
    }
}

/// A non-empty disjunction of terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause(Vec<Term>);

impl Clause {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Predicate("a clause needs at least one term".into()));
        }
        Ok(Clause(terms))
    }

    pub fn single(term: Term) -> Self {
        Clause(vec![term])
    }

    pub fn terms(&self) -> &[Term] {
        &self.0
    }
}

/// A conjunction of clauses; empty means always true.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct CnfPredicate(Vec<Clause>);

impl CnfPredicate {
    pub fn new(clauses: Vec<Clause>) -> Self {
        CnfPredicate(clauses)
    }

    pub fn always_true() -> Self {
        CnfPredicate(Vec::new())
    }

    /// Conjunction of single-term clauses.
    pub fn conjunction(terms: impl IntoIterator<Item = Term>) -> Self {
        CnfPredicate(terms.into_iter().map(Clause::single).collect())
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.0
    }

    pub fn and(mut self, other: CnfPredicate) -> Self {
        self.0.extend(other.0);
        self
    }

    /// True when every clause is a single term (no disjunction).
    pub fn is_conjunctive(&self) -> bool {
        self.0.iter().all(|c| c.0.len() == 1)
    }

    /// Checks that all terms are well-typed against `schema`.
    pub fn check(&self, schema: &TableSchema) -> Result<()> {
        self.bind(schema).map(|_| ())
    }

    pub fn bind(&self, schema: &TableSchema) -> Result<BoundPredicate> {
        let clauses = self
            .0
            .iter()
            .map(|c| c.0.iter().map(|t| BoundTerm::bind(t, schema)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundPredicate { clauses })
    }

    pub fn parse(input: &str, schema: &TableSchema) -> Result<Self> {
        Parser::new(input, schema)?.parse_cnf()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub predicate: CnfPredicate,
    /// Columns to return; `None` returns every column.
    pub projection: Option<Vec<String>>,
}

impl Query {
    pub fn new(predicate: CnfPredicate) -> Self {
        Query {
            predicate,
            projection: None,
        }
    }

    pub fn with_projection(mut self, cols: Vec<String>) -> Self {
        self.projection = Some(cols);
        self
    }

    pub fn projection_positions(&self, schema: &TableSchema) -> Result<Option<Vec<usize>>> {
        self.projection
            .as_ref()
            .map(|cols| cols.iter().map(|c| schema.position(c)).collect())
            .transpose()
    }
}

impl From<CnfPredicate> for Query {
    fn from(p: CnfPredicate) -> Self {
        Query::new(p)
    }
}

#[derive(Debug, Clone)]
enum BoundRhs {
    Value(Value),
    Column(usize),
}

#[derive(Debug, Clone)]
struct BoundTerm {
    column: usize,
    op: CmpOp,
    rhs: BoundRhs,
}

impl BoundTerm {
    fn bind(t: &Term, schema: &TableSchema) -> Result<Self> {
        let column = schema.position(&t.column)?;
        let kind = schema.columns()[column].kind;
        let rhs = match &t.rhs {
            Operand::Value(v) => {
                if v.kind() != kind {
                    return Err(Error::TypeMismatch {
                        expected: kind,
                        found: v.kind(),
                    });
                }
                BoundRhs::Value(v.clone())
            }
            Operand::Column(c) => {
                let pos = schema.position(c)?;
                let other = schema.columns()[pos].kind;
                if other != kind {
                    return Err(Error::TypeMismatch {
                        expected: kind,
                        found: other,
                    });
                }
                BoundRhs::Column(pos)
            }
        };
        Ok(BoundTerm { column, op: t.op, rhs })
    }

    fn matches(&self, t: &Tuple) -> bool {
        let lhs = t.get(self.column);
        match &self.rhs {
            BoundRhs::Value(v) => self.op.eval(lhs, v),
            BoundRhs::Column(c) => self.op.eval(lhs, t.get(*c)),
        }
    }
}

/// A predicate resolved against a schema; evaluation is infallible.
#[derive(Debug, Clone)]
pub struct BoundPredicate {
    clauses: Vec<Vec<BoundTerm>>,
}

impl BoundPredicate {
    pub fn matches(&self, t: &Tuple) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|term| term.matches(t)))
    }
}

/// Evaluates `pred` on `t`, checking types against `schema`.
pub fn satisfies(pred: &CnfPredicate, schema: &TableSchema, t: &Tuple) -> Result<bool> {
    schema.check_tuple(t)?;
    Ok(pred.bind(schema)?.matches(t))
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ", self.column, self.op)?;
        match &self.rhs {
            Operand::Column(c) => f.write_str(c),
            Operand::Value(Value::Text(s)) => write!(f, "'{}'", s.replace('\'', "''")),
            Operand::Value(v) => write!(f, "{v}"),
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let multi = self.0.len() > 1;
        if multi {
            f.write_str("(")?;
        }
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" OR ")?;
            }
            write!(f, "{t}")?;
        }
        if multi {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for CnfPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("TRUE");
        }
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" AND ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    LParen,
    RParen,
    Op(CmpOp),
    Word(String),
    Quoted(String),
}

fn tokenize(input: &str) -> Result<Vec<Token>> {
    let err = |msg: String| Error::Predicate(msg);
    let mut out = Vec::new();
    let mut chars = input.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                out.push(Token::LParen);
            }
            ')' => {
                chars.next();
                out.push(Token::RParen);
            }
            '=' | '!' | '<' | '>' => {
                let mut sym = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if "=!<>".contains(c) {
                        sym.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                let op = CmpOp::from_symbol(&sym).ok_or_else(|| err(format!("unknown operator `{sym}` at {i}")))?;
                out.push(Token::Op(op));
            }
            '\'' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some((_, '\'')) => {
                            if matches!(chars.peek(), Some((_, '\''))) {
                                chars.next();
                                s.push('\'');
                            } else {
                                break;
                            }
                        }
                        Some((_, c)) => s.push(c),
                        None => return Err(err(format!("unterminated string starting at {i}"))),
                    }
                }
                out.push(Token::Quoted(s));
            }
            _ => {
                let mut s = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_whitespace() || "()=!<>'".contains(c) {
                        break;
                    }
                    s.push(c);
                    chars.next();
                }
                out.push(Token::Word(s));
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    schema: &'a TableSchema,
}

impl<'a> Parser<'a> {
    fn new(input: &str, schema: &'a TableSchema) -> Result<Self> {
        Ok(Parser {
            tokens: tokenize(input)?,
            pos: 0,
            schema,
        })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Token::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn parse_cnf(mut self) -> Result<CnfPredicate> {
        if self.tokens.is_empty() {
            return Ok(CnfPredicate::always_true());
        }
        if self.is_keyword("TRUE") && self.tokens.len() == 1 {
            return Ok(CnfPredicate::always_true());
        }
        let mut clauses = vec![self.parse_clause()?];
        while self.is_keyword("AND") {
            self.next();
            clauses.push(self.parse_clause()?);
        }
        if let Some(t) = self.peek() {
            return Err(Error::Predicate(format!("unexpected token {t:?}")));
        }
        Ok(CnfPredicate(clauses))
    }

    fn parse_clause(&mut self) -> Result<Clause> {
        if self.peek() == Some(&Token::LParen) {
            self.next();
            let clause = self.parse_disjunction()?;
            match self.next() {
                Some(Token::RParen) => Ok(clause),
                other => Err(Error::Predicate(format!("expected `)`, found {other:?}"))),
            }
        } else {
            self.parse_disjunction()
        }
    }

    fn parse_disjunction(&mut self) -> Result<Clause> {
        let mut terms = vec![self.parse_term()?];
        while self.is_keyword("OR") {
            self.next();
            terms.push(self.parse_term()?);
        }
        Clause::new(terms)
    }

    fn parse_term(&mut self) -> Result<Term> {
        let column = match self.next() {
            Some(Token::Word(w)) => w,
            other => return Err(Error::Predicate(format!("expected column name, found {other:?}"))),
        };
        let kind = self.schema.kind_of(&column)?;
        let op = match self.next() {
            Some(Token::Op(op)) => op,
            other => return Err(Error::Predicate(format!("expected operator, found {other:?}"))),
        };
        let rhs = match self.next() {
            Some(Token::Quoted(s)) => {
                if kind != ValueKind::Text {
                    return Err(Error::TypeMismatch {
                        expected: kind,
                        found: ValueKind::Text,
                    });
                }
                Operand::Value(Value::text(s)?)
            }
            Some(Token::Word(w)) => {
                if self.schema.position(&w).is_ok() {
                    Operand::Column(w)
                } else {
                    Operand::Value(Value::parse(kind, &w)?)
                }
            }
            other => return Err(Error::Predicate(format!("expected value, found {other:?}"))),
        };
        let term = Term { column, op, rhs };
        BoundTerm::bind(&term, self.schema)?;
        Ok(term)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> TableSchema {
        TableSchema::from_pairs([
            ("date", ValueKind::Date),
            ("metric", ValueKind::Text),
            ("val", ValueKind::Int),
            ("limit", ValueKind::Int),
        ])
        .unwrap()
    }

    #[test]
    fn parse_and_display_round_trip() {
        let s = schema();
        let text = "(date = 2020-02-20 OR date = 2020-03-13) AND val > 90 AND metric = 'it''s' AND val <= limit";
        let p = CnfPredicate::parse(text, &s).unwrap();
        assert_eq!(p.clauses().len(), 4);
        assert!(p.clauses()[3].terms()[0].is_column_column());
        assert_eq!(p.to_string(), text);
        assert_eq!(CnfPredicate::parse(&p.to_string(), &s).unwrap(), p);
    }

    #[test]
    fn parse_empty_and_true() {
        let s = schema();
        assert_eq!(CnfPredicate::parse("", &s).unwrap(), CnfPredicate::always_true());
        assert_eq!(CnfPredicate::parse("TRUE", &s).unwrap(), CnfPredicate::always_true());
    }

    #[test]
    fn parse_rejects_type_errors() {
        let s = schema();
        assert!(CnfPredicate::parse("val = 'x'", &s).is_err());
        assert!(CnfPredicate::parse("val = date", &s).is_err());
        assert!(CnfPredicate::parse("nope = 1", &s).is_err());
        assert!(CnfPredicate::parse("(val = 1", &s).is_err());
    }

    #[test]
    fn satisfies_checks_types() {
        let s = schema();
        let p = CnfPredicate::conjunction([Term::value("val", CmpOp::Gt, Value::Date(3))]);
        let t = Tuple::new(vec![Value::Date(0), Value::text("cpu").unwrap(), Value::Int(4), Value::Int(1)]);
        assert!(matches!(satisfies(&p, &s, &t), Err(Error::TypeMismatch { .. })));
    }

    #[test]
    fn column_column_terms_compare_within_tuple() {
        let s = schema();
        let p = CnfPredicate::conjunction([Term::columns("val", CmpOp::Le, "limit")]);
        let t = |v, l| Tuple::new(vec![Value::Date(0), Value::text("cpu").unwrap(), Value::Int(v), Value::Int(l)]);
        assert!(satisfies(&p, &s, &t(3, 3)).unwrap());
        assert!(!satisfies(&p, &s, &t(4, 3)).unwrap());
    }
}
