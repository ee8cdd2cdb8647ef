//! Scalar expressions for user-supplied angle fields `θ(x1, x2)` and
//! `(α,β)`-metric profiles `φ(s)`.
//!
//! Grammar (`^` is right-associative, no implicit multiplication):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := unary ('^' factor)?
//! unary  := '-'? atom
//! atom   := number | ident | ident '(' args ')' | '(' expr ')'
//! ```
//!
//! Functions: `sin cos tan atan2 sqrt abs exp log`; constant: `pi`.
//! Angles are radians.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Atan2,
    Sqrt,
    Abs,
    Exp,
    Log,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "atan2" => Func::Atan2,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "exp" => Func::Exp,
            "log" => Func::Log,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Atan2 => "atan2",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }

    fn arity(self) -> usize {
        match self {
            Func::Atan2 => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub enum NodeKind {
    Number(f64),
    Pi,
    /// Index into the declared variable list.
    Var(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// A syntax-tree node tagged with the byte offset it was parsed from.
#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    pub offset: usize,
}

impl Node {
    /// Tree equality ignoring source offsets.
    pub fn same_shape(&self, other: &Node) -> bool {
        use NodeKind::*;
        match (&self.kind, &other.kind) {
            (Number(a), Number(b)) => a.to_bits() == b.to_bits(),
            (Pi, Pi) => true,
            (Var(a), Var(b)) => a == b,
            (Neg(a), Neg(b)) => a.same_shape(b),
            (Binary(o1, l1, r1), Binary(o2, l2, r2)) => {
                o1 == o2 && l1.same_shape(l2) && r1.same_shape(r2)
            }
            (Call(f1, a1), Call(f2, a2)) => {
                f1 == f2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(x, y)| x.same_shape(y))
            }
            _ => false,
        }
    }
}

/// A parsed expression over a fixed, ordered set of variables.
#[derive(Debug, Clone)]
pub struct Expr {
    root: Node,
    variables: Vec<String>,
    source: String,
}

impl Expr {
    pub fn parse(source: &str, variables: &[&str]) -> Result<Expr> {
        let tokens = lex(source)?;
        let variables: Vec<String> = variables.iter().map(|v| v.to_string()).collect();
        let mut parser = Parser {
            tokens: &tokens,
            pos: 0,
            variables: &variables,
            end: source.len(),
        };
        let root = parser.expr()?;
        if let Some(tok) = parser.peek() {
            return Err(Error::Syntax {
                offset: tok.offset,
                message: format!("unexpected {}", tok.kind.describe()),
            });
        }
        Ok(Expr {
            root,
            variables,
            source: source.to_string(),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Evaluates with `values[i]` bound to the i-th declared variable.
    pub fn eval(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.variables.len() {
            return Err(Error::domain(format!(
                "expected {} variable value(s), got {}",
                self.variables.len(),
                values.len()
            )));
        }
        eval_node(&self.root, values)
    }

    /// Evaluates with bindings looked up by name.
    pub fn eval_named(&self, bindings: &HashMap<&str, f64>) -> Result<f64> {
        let values = self
            .variables
            .iter()
            .map(|v| {
                bindings
                    .get(v.as_str())
                    .copied()
                    .ok_or_else(|| Error::domain(format!("no binding for variable `{v}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        eval_node(&self.root, &values)
    }

    /// Structural equality of the syntax trees.
    pub fn same_shape(&self, other: &Expr) -> bool {
        self.variables == other.variables && self.root.same_shape(&other.root)
    }
}

/// Canonical, fully parenthesized form; re-parsing it yields the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root, &self.variables)
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, node: &Node, vars: &[String]) -> fmt::Result {
    match &node.kind {
        NodeKind::Number(v) => write!(f, "{v:?}"),
        NodeKind::Pi => write!(f, "pi"),
        NodeKind::Var(i) => write!(f, "{}", vars[*i]),
        NodeKind::Neg(inner) => {
            write!(f, "(-")?;
            write_node(f, inner, vars)?;
            write!(f, ")")
        }
        NodeKind::Binary(op, lhs, rhs) => {
            write!(f, "(")?;
            write_node(f, lhs, vars)?;
            write!(f, "{}", op.symbol())?;
            write_node(f, rhs, vars)?;
            write!(f, ")")
        }
        NodeKind::Call(func, args) => {
            write!(f, "{}(", func.name())?;
            for (i, arg) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write_node(f, arg, vars)?;
            }
            write!(f, ")")
        }
    }
}

fn eval_error(node: &Node, message: impl Into<String>) -> Error {
    Error::Eval {
        offset: node.offset,
        message: message.into(),
    }
}

fn eval_node(node: &Node, values: &[f64]) -> Result<f64> {
    let value = match &node.kind {
        NodeKind::Number(v) => *v,
        NodeKind::Pi => std::f64::consts::PI,
        NodeKind::Var(i) => values[*i],
        NodeKind::Neg(inner) => -eval_node(inner, values)?,
        NodeKind::Binary(op, lhs, rhs) => {
            let l = eval_node(lhs, values)?;
            let r = eval_node(rhs, values)?;
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => {
                    if r == 0.0 {
                        return Err(eval_error(node, "division by zero"));
                    }
                    l / r
                }
                BinOp::Pow => l.powf(r),
            }
        }
        NodeKind::Call(func, args) => {
            let a = eval_node(&args[0], values)?;
            match func {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Tan => a.tan(),
                Func::Atan2 => {
                    let b = eval_node(&args[1], values)?;
                    if a == 0.0 && b == 0.0 {
                        return Err(eval_error(node, "atan2(0, 0) is undefined"));
                    }
                    a.atan2(b)
                }
                Func::Sqrt => {
                    if a < 0.0 {
                        return Err(eval_error(node, format!("sqrt of negative value {a}")));
                    }
                    a.sqrt()
                }
                Func::Abs => a.abs(),
                Func::Exp => a.exp(),
                Func::Log => {
                    if a <= 0.0 {
                        return Err(eval_error(node, format!("log of nonpositive value {a}")));
                    }
                    a.ln()
                }
            }
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(eval_error(node, "non-finite result"))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Number(v) => format!("number {v}"),
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Plus => "`+`".into(),
            TokenKind::Minus => "`-`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::Slash => "`/`".into(),
            TokenKind::Caret => "`^`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::Comma => "`,`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn lex(source: &str) -> Result<Vec<Token>> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let kind = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => TokenKind::Plus,
            b'-' => TokenKind::Minus,
            b'*' => TokenKind::Star,
            b'/' => TokenKind::Slash,
            b'^' => TokenKind::Caret,
            b'(' => TokenKind::LParen,
            b')' => TokenKind::RParen,
            b',' => TokenKind::Comma,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &source[start..i];
                let value: f64 = text.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                if !value.is_finite() {
                    return Err(Error::Syntax {
                        offset: start,
                        message: format!("number `{text}` is out of range"),
                    });
                }
                tokens.push(Token {
                    kind: TokenKind::Number(value),
                    offset: start,
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(source[start..i].to_string()),
                    offset: start,
                });
                continue;
            }
            _ => {
                let ch = source[start..].chars().next().unwrap_or('?');
                return Err(Error::Syntax {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        tokens.push(Token {
            kind,
            offset: start,
        });
        i += 1;
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    variables: &'a [String],
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<&TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    fn next(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        tok
    }

    fn unexpected(&self) -> Error {
        match self.peek() {
            Some(tok) => Error::Syntax {
                offset: tok.offset,
                message: format!("unexpected {}", tok.kind.describe()),
            },
            None => Error::Syntax {
                offset: self.end,
                message: "unexpected end of input".into(),
            },
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<()> {
        if self.peek_kind() == Some(&kind) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(op) = match self.peek_kind() {
            Some(TokenKind::Plus) => Some(BinOp::Add),
            Some(TokenKind::Minus) => Some(BinOp::Sub),
            _ => None,
        } {
            let offset = self.next().map(|t| t.offset).unwrap_or(self.end);
            let rhs = self.term()?;
            lhs = Node {
                kind: NodeKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                offset,
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        while let Some(op) = match self.peek_kind() {
            Some(TokenKind::Star) => Some(BinOp::Mul),
            Some(TokenKind::Slash) => Some(BinOp::Div),
            _ => None,
        } {
            let offset = self.next().map(|t| t.offset).unwrap_or(self.end);
            let rhs = self.factor()?;
            lhs = Node {
                kind: NodeKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                offset,
            };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Node> {
        let base = self.unary()?;
        if self.peek_kind() == Some(&TokenKind::Caret) {
            let offset = self.next().map(|t| t.offset).unwrap_or(self.end);
            let exponent = self.factor()?;
            return Ok(Node {
                kind: NodeKind::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)),
                offset,
            });
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Node> {
        if self.peek_kind() == Some(&TokenKind::Minus) {
            let offset = self.next().map(|t| t.offset).unwrap_or(self.end);
            let inner = self.atom()?;
            return Ok(Node {
                kind: NodeKind::Neg(Box::new(inner)),
                offset,
            });
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Node> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.unexpected());
        };
        match tok.kind {
            TokenKind::Number(v) => {
                self.pos += 1;
                Ok(Node {
                    kind: NodeKind::Number(v),
                    offset: tok.offset,
                })
            }
            TokenKind::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                self.pos += 1;
                if self.peek_kind() == Some(&TokenKind::LParen) {
                    self.pos += 1;
                    self.call(&name, tok.offset)
                } else if let Some(idx) = self.variables.iter().position(|v| *v == name) {
                    Ok(Node {
                        kind: NodeKind::Var(idx),
                        offset: tok.offset,
                    })
                } else if name == "pi" {
                    Ok(Node {
                        kind: NodeKind::Pi,
                        offset: tok.offset,
                    })
                } else {
                    Err(Error::UnknownIdentifier {
                        name,
                        offset: tok.offset,
                    })
                }
            }
            _ => Err(self.unexpected()),
        }
    }

    fn call(&mut self, name: &str, offset: usize) -> Result<Node> {
        let func = Func::lookup(name).ok_or_else(|| Error::UnknownIdentifier {
            name: name.to_string(),
            offset,
        })?;
        let mut args = Vec::new();
        if self.peek_kind() != Some(&TokenKind::RParen) {
            args.push(self.expr()?);
            while self.peek_kind() == Some(&TokenKind::Comma) {
                self.pos += 1;
                args.push(self.expr()?);
            }
        }
        self.expect(TokenKind::RParen)?;
        if args.len() != func.arity() {
            return Err(Error::Arity {
                name: name.to_string(),
                expected: func.arity(),
                found: args.len(),
                offset,
            });
        }
        Ok(Node {
            kind: NodeKind::Call(func, args),
            offset,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn eval2(src: &str, x1: f64, x2: f64) -> Result<f64> {
        Expr::parse(src, &["x1", "x2"])?.eval(&[x1, x2])
    }

    #[test]
    fn evaluates_basic_expressions() {
        assert_eq!(eval2("sin(x1)+x2^2", 0.0, 2.0).unwrap(), 4.0);
        assert!((eval2("atan2(x2,x1)+pi/2", 0.0, 1.0).unwrap() - PI).abs() < 1e-15);
        assert_eq!(eval2("x1*x2", 3.0, 4.0).unwrap(), 12.0);
    }

    #[test]
    fn power_is_right_associative() {
        assert_eq!(eval2("2^3^2", 0.0, 0.0).unwrap(), 512.0);
        assert_eq!(eval2("2^-1", 0.0, 0.0).unwrap(), 0.5);
    }

    #[test]
    fn unary_minus_binds_to_atom() {
        // unary := '-'? atom, so the minus applies before '^'
        assert_eq!(eval2("-2^2", 0.0, 0.0).unwrap(), 4.0);
        assert_eq!(eval2("1 - -2", 0.0, 0.0).unwrap(), 3.0);
        assert!(matches!(
            Expr::parse("--2", &[]),
            Err(Error::Syntax { offset: 1, .. })
        ));
    }

    #[test]
    fn syntax_error_reports_offset() {
        match Expr::parse("1+*2", &["x1", "x2"]) {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(matches!(
            Expr::parse("(1+2", &[]),
            Err(Error::Syntax { offset: 4, .. })
        ));
        assert!(matches!(
            Expr::parse("2 3", &[]),
            Err(Error::Syntax { offset: 2, .. })
        ));
        assert!(matches!(
            Expr::parse("2 # 3", &[]),
            Err(Error::Syntax { offset: 2, .. })
        ));
    }

    #[test]
    fn rejects_unknown_identifiers_and_bad_arity() {
        assert!(matches!(
            Expr::parse("x3 + 1", &["x1", "x2"]),
            Err(Error::UnknownIdentifier { offset: 0, .. })
        ));
        assert!(matches!(
            Expr::parse("foo(1)", &["s"]),
            Err(Error::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            Expr::parse("atan2(1)", &["s"]),
            Err(Error::Arity {
                expected: 2,
                found: 1,
                ..
            })
        ));
        assert!(matches!(
            Expr::parse("sin(1, 2)", &["s"]),
            Err(Error::Arity {
                expected: 1,
                found: 2,
                ..
            })
        ));
    }

    #[test]
    fn evaluation_errors_carry_location() {
        match eval2("1 + sqrt(x1)", -1.0, 0.0) {
            Err(Error::Eval { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected eval error, got {other:?}"),
        }
        assert!(matches!(
            eval2("1/x1", 0.0, 1.0),
            Err(Error::Eval { offset: 1, .. })
        ));
        assert!(matches!(
            eval2("log(x2)", 1.0, 0.0),
            Err(Error::Eval { .. })
        ));
        assert!(matches!(
            eval2("atan2(x2, x1)", 0.0, 0.0),
            Err(Error::Eval { .. })
        ));
        assert!(matches!(
            eval2("(-1)^0.5", 0.0, 0.0),
            Err(Error::Eval { .. })
        ));
    }

    #[test]
    fn named_bindings() {
        let e = Expr::parse("1 + s", &["s"]).unwrap();
        let mut b = HashMap::new();
        b.insert("s", 0.25);
        assert_eq!(e.eval_named(&b).unwrap(), 1.25);
        assert!(e.eval_named(&HashMap::new()).is_err());
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(eval2("1.5e2 + 2E-1", 0.0, 0.0).unwrap(), 150.2);
        assert!(Expr::parse("1e400", &[]).is_err());
    }

    #[test]
    fn printed_form_reparses_to_same_tree() {
        for src in [
            "sin(x1)+x2^2",
            "-x1*cos(x2)/2 - 3^2^0.5",
            "atan2(x2, x1) + pi/2",
            "exp(-(x1 - 0.1)) * abs(x2)",
        ] {
            let e = Expr::parse(src, &["x1", "x2"]).unwrap();
            let printed = e.to_string();
            let again = Expr::parse(&printed, &["x1", "x2"]).unwrap();
            assert!(e.same_shape(&again), "{src} -> {printed}");
        }
    }
}
