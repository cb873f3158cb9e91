//! The scalar expression language used for parametric paths, patches and
//! group cochains.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | primary
//! primary := number | name | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | exp
//! ```
//!
//! Names are resolved at parse time against the variables a section allows
//! (`t`, `s`, `x1`, `y2`, ...) plus the constant `pi`. There are no
//! user-defined functions.

use std::f64::consts::PI;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ExprError {
    /// 1-based character column inside the expression string.
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

impl std::error::Error for ExprError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Exp,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression whose variables index into a fixed slot list.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    source: String,
}

impl Expr {
    /// Parses `src`, resolving each identifier to its position in `vars`.
    pub fn parse(src: &str, vars: &[&str]) -> Result<Self, ExprError> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens: &tokens, pos: 0, vars, end: src.chars().count() + 1 };
        let root = p.expr()?;
        if let Some(tok) = p.peek() {
            return Err(ExprError { column: tok.column, message: format!("unexpected {}", tok.kind) });
        }
        Ok(Self { root, source: src.to_string() })
    }

    pub fn eval(&self, vals: &[f64]) -> f64 {
        eval(&self.root, vals)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Whether the value is the same for every assignment, i.e. no variable
    /// occurs in the expression.
    pub fn is_constant(&self) -> bool {
        fn walk(n: &Node) -> bool {
            match n {
                Node::Num(_) => true,
                Node::Var(_) => false,
                Node::Neg(a) | Node::Call(_, a) => walk(a),
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => walk(a) && walk(b),
            }
        }
        walk(&self.root)
    }
}

fn eval(n: &Node, vals: &[f64]) -> f64 {
    match n {
        Node::Num(x) => *x,
        Node::Var(i) => vals[*i],
        Node::Neg(a) => -eval(a, vals),
        Node::Add(a, b) => eval(a, vals) + eval(b, vals),
        Node::Sub(a, b) => eval(a, vals) - eval(b, vals),
        Node::Mul(a, b) => eval(a, vals) * eval(b, vals),
        Node::Div(a, b) => eval(a, vals) / eval(b, vals),
        Node::Call(f, a) => {
            let x = eval(a, vals);
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Num(x) => write!(f, "number {x}"),
            Kind::Ident(s) => write!(f, "name '{s}'"),
            Kind::Op(c) => write!(f, "'{c}'"),
            Kind::LParen => f.write_str("'('"),
            Kind::RParen => f.write_str("')'"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: Kind,
    column: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part: 1e-3, 2.5E+4
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let x =
                text.parse::<f64>().map_err(|_| ExprError { column, message: format!("malformed number '{text}'") })?;
            out.push(Token { kind: Kind::Num(x), column });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { kind: Kind::Ident(chars[start..i].iter().collect()), column });
        } else if "+-*/".contains(c) {
            out.push(Token { kind: Kind::Op(c), column });
            i += 1;
        } else if c == '(' {
            out.push(Token { kind: Kind::LParen, column });
            i += 1;
        } else if c == ')' {
            out.push(Token { kind: Kind::RParen, column });
            i += 1;
        } else {
            return Err(ExprError { column, message: format!("unexpected character '{c}'") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    vars: &'a [&'a str],
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn peek_op(&self) -> Option<char> {
        match self.peek() {
            Some(Token { kind: Kind::Op(c), .. }) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' { Node::Add(lhs.into(), rhs.into()) } else { Node::Sub(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' { Node::Mul(lhs.into(), rhs.into()) } else { Node::Div(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(Node::Neg(self.unary()?.into()))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        let Some(tok) = self.next() else {
            return Err(ExprError { column: self.end, message: "unexpected end of expression".into() });
        };
        match tok.kind {
            Kind::Num(x) => Ok(Node::Num(x)),
            Kind::LParen => {
                let inner = self.expr()?;
                self.close_paren()?;
                Ok(inner)
            }
            Kind::Ident(name) => {
                let func = match name.as_str() {
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "exp" => Some(Func::Exp),
                    _ => None,
                };
                if let Some(func) = func {
                    match self.next() {
                        Some(Token { kind: Kind::LParen, .. }) => {}
                        _ => {
                            return Err(ExprError {
                                column: tok.column,
                                message: format!("'{name}' must be followed by '('"),
                            })
                        }
                    }
                    let arg = self.expr()?;
                    self.close_paren()?;
                    return Ok(Node::Call(func, arg.into()));
                }
                if name == "pi" {
                    return Ok(Node::Num(PI));
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Node::Var(i)),
                    None => Err(ExprError {
                        column: tok.column,
                        message: format!(
                            "unknown name '{name}' (allowed here: {})",
                            if self.vars.is_empty() { "constants only".to_string() } else { self.vars.join(", ") }
                        ),
                    }),
                }
            }
            other => Err(ExprError { column: tok.column, message: format!("unexpected {other}") }),
        }
    }

    fn close_paren(&mut self) -> Result<(), ExprError> {
        match self.next() {
            Some(Token { kind: Kind::RParen, .. }) => Ok(()),
            Some(t) => Err(ExprError { column: t.column, message: format!("expected ')', found {}", t.kind) }),
            None => Err(ExprError { column: self.end, message: "missing ')'".into() }),
        }
    }
}
