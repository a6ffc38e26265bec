//! A small arithmetic-expression language in one free variable.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          right associative
//! atom    := number | variable | 'pi' | func '(' sum ')' | '(' sum ')'
//! ```
//!
//! Functions: `sin cos exp sqrt abs ln sign`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
    Ln,
    Sign,
}

impl Func {
    const ALL: [Func; 7] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Sqrt,
        Func::Abs,
        Func::Ln,
        Func::Sign,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Ln => "ln",
            Func::Sign => "sign",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
            Func::Ln => v.ln(),
            Func::Sign => {
                if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var,
    Neg(Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression together with the name of its free variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    var: String,
}

impl Expr {
    pub fn parse(text: &str, var: &str) -> Result<Self> {
        let mut p = Parser {
            src: text,
            pos: 0,
            var,
        };
        p.skip_ws();
        if p.pos >= text.len() {
            return Err(Error::Syntax {
                offset: 0,
                message: "empty expression".into(),
            });
        }
        let root = p.sum()?;
        p.skip_ws();
        if p.pos < text.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Self {
            root,
            var: var.to_string(),
        })
    }

    pub fn from_node(root: Node, var: &str) -> Self {
        Self {
            root,
            var: var.to_string(),
        }
    }

    pub fn constant(value: f64, var: &str) -> Self {
        Self::from_node(Node::Num(value), var)
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn variable(&self) -> &str {
        &self.var
    }

    pub fn eval(&self, value: f64) -> f64 {
        eval_node(&self.root, value)
    }

    /// Evaluates and rejects non-finite results.
    pub fn try_eval(&self, value: f64) -> Result<f64> {
        let y = self.eval(value);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFinite {
                context: format!("`{self}` at {} = {value}", self.var),
            })
        }
    }

    /// Symbolic derivative with respect to the free variable.
    pub fn derivative(&self) -> Self {
        Self {
            root: derive(&self.root),
            var: self.var.clone(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root, &self.var)
    }
}

fn eval_node(n: &Node, v: f64) -> f64 {
    match n {
        Node::Num(c) => *c,
        Node::Var => v,
        Node::Neg(a) => -eval_node(a, v),
        Node::Binary(op, a, b) => {
            let (a, b) = (eval_node(a, v), eval_node(b, v));
            match op {
                BinaryOp::Add => a + b,
                BinaryOp::Sub => a - b,
                BinaryOp::Mul => a * b,
                BinaryOp::Div => a / b,
                BinaryOp::Pow => a.powf(b),
            }
        }
        Node::Call(func, a) => func.apply(eval_node(a, v)),
    }
}

fn contains_var(n: &Node) -> bool {
    match n {
        Node::Num(_) => false,
        Node::Var => true,
        Node::Neg(a) | Node::Call(_, a) => contains_var(a),
        Node::Binary(_, a, b) => contains_var(a) || contains_var(b),
    }
}

fn num(c: f64) -> Node {
    Node::Num(c)
}

fn neg(a: Node) -> Node {
    match a {
        Node::Num(c) => Node::Num(-c),
        Node::Neg(inner) => *inner,
        other => Node::Neg(Box::new(other)),
    }
}

fn bin(op: BinaryOp, a: Node, b: Node) -> Node {
    use BinaryOp::*;
    match (op, &a, &b) {
        (Add, Node::Num(x), _) if *x == 0.0 => b,
        (Add, _, Node::Num(y)) if *y == 0.0 => a,
        (Sub, _, Node::Num(y)) if *y == 0.0 => a,
        (Sub, Node::Num(x), _) if *x == 0.0 => neg(b),
        (Mul, Node::Num(x), _) | (Mul, _, Node::Num(x)) if *x == 0.0 => num(0.0),
        (Mul, Node::Num(x), _) if *x == 1.0 => b,
        (Mul, _, Node::Num(y)) if *y == 1.0 => a,
        (Div, Node::Num(x), _) if *x == 0.0 => num(0.0),
        (Div, _, Node::Num(y)) if *y == 1.0 => a,
        (Pow, _, Node::Num(y)) if *y == 1.0 => a,
        _ => Node::Binary(op, Box::new(a), Box::new(b)),
    }
}

fn call(f: Func, a: Node) -> Node {
    Node::Call(f, Box::new(a))
}

fn derive(n: &Node) -> Node {
    use BinaryOp::*;
    match n {
        Node::Num(_) => num(0.0),
        Node::Var => num(1.0),
        Node::Neg(a) => neg(derive(a)),
        Node::Binary(op, a, b) => {
            let (da, db) = (derive(a), derive(b));
            let (a, b) = ((**a).clone(), (**b).clone());
            match op {
                Add => bin(Add, da, db),
                Sub => bin(Sub, da, db),
                Mul => bin(Add, bin(Mul, da, b.clone()), bin(Mul, a, db)),
                Div => bin(
                    Div,
                    bin(Sub, bin(Mul, da, b.clone()), bin(Mul, a, db)),
                    bin(Pow, b, num(2.0)),
                ),
                Pow if !contains_var(&b) => bin(
                    Mul,
                    bin(Mul, b.clone(), bin(Pow, a, bin(Sub, b, num(1.0)))),
                    da,
                ),
                Pow => {
                    // d(a^b) = a^b (b' ln a + b a' / a)
                    let inner = bin(
                        Add,
                        bin(Mul, db, call(Func::Ln, a.clone())),
                        bin(Div, bin(Mul, b.clone(), da), a.clone()),
                    );
                    bin(Mul, bin(Pow, a, b), inner)
                }
            }
        }
        Node::Call(func, a) => {
            let da = derive(a);
            let a = (**a).clone();
            let outer = match func {
                Func::Sin => call(Func::Cos, a),
                Func::Cos => neg(call(Func::Sin, a)),
                Func::Exp => call(Func::Exp, a),
                Func::Sqrt => bin(Div, num(0.5), call(Func::Sqrt, a)),
                Func::Abs => call(Func::Sign, a),
                Func::Ln => bin(Div, num(1.0), a),
                Func::Sign => num(0.0),
            };
            bin(Mul, outer, da)
        }
    }
}

/// Binding strength used by the printer; higher binds tighter.
fn precedence(n: &Node) -> u8 {
    match n {
        Node::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
        Node::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
        Node::Neg(_) => 3,
        Node::Num(c) if c.is_sign_negative() => 3,
        Node::Binary(BinaryOp::Pow, ..) => 4,
        Node::Num(_) | Node::Var | Node::Call(..) => 5,
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, n: &Node, var: &str, wrap: bool) -> fmt::Result {
    if wrap {
        f.write_str("(")?;
        write_node(f, n, var)?;
        f.write_str(")")
    } else {
        write_node(f, n, var)
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, n: &Node, var: &str) -> fmt::Result {
    match n {
        Node::Num(c) => write!(f, "{c:?}"),
        Node::Var => f.write_str(var),
        Node::Neg(a) => {
            f.write_str("-")?;
            write_wrapped(f, a, var, precedence(a) < 3)
        }
        Node::Binary(op, a, b) => {
            let p = precedence(n);
            let (wrap_a, wrap_b) = if *op == BinaryOp::Pow {
                // Base must be an atom; exponent may be a power or negation.
                (precedence(a) < 5, precedence(b) < 3)
            } else {
                (precedence(a) < p, precedence(b) <= p)
            };
            write_wrapped(f, a, var, wrap_a)?;
            if *op == BinaryOp::Pow {
                f.write_str("^")?;
            } else {
                write!(f, " {} ", op.symbol())?;
            }
            write_wrapped(f, b, var, wrap_b)
        }
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(f, a, var)?;
            f.write_str(")")
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    var: &'a str,
}

impl<'a> Parser<'a> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Node> {
        let mut lhs = self.product()?;
        loop {
            let op = if self.eat('+') {
                BinaryOp::Add
            } else if self.eat('-') {
                BinaryOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.product()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinaryOp::Mul
            } else if self.eat('/') {
                BinaryOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.eat('^') {
            let exponent = self.unary()?;
            return Ok(Node::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if !self.eat(')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(start),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                    self.pos += 1;
                }
                let name = &self.src[start..self.pos];
                if name == self.var {
                    return Ok(Node::Var);
                }
                if name == "pi" {
                    return Ok(Node::Num(std::f64::consts::PI));
                }
                match Func::from_name(name) {
                    Some(func) => {
                        if !self.eat('(') {
                            return Err(self.error("expected `(` after function name"));
                        }
                        let arg = self.sum()?;
                        if !self.eat(')') {
                            return Err(self.error("expected `)`"));
                        }
                        Ok(Node::Call(func, Box::new(arg)))
                    }
                    None => Err(Error::UnknownIdentifier {
                        offset: start,
                        name: name.to_string(),
                    }),
                }
            }
            Some(_) => Err(self.error("expected a number, variable, function or `(`")),
        }
    }

    fn number(&mut self, start: usize) -> Result<Node> {
        let bytes = self.src.as_bytes();
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let text = &self.src[start..end];
        let value: f64 = text.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })?;
        self.pos = end;
        Ok(Node::Num(value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn evaluates_rail_profile() {
        let e = Expr::parse("2 + 0.3*sin(x)", "x").unwrap();
        assert_eq!(e.eval(0.0), 2.0);
        let e = Expr::parse("x^2 + 2", "x").unwrap();
        assert_eq!(e.eval(-1.0), 3.0);
    }

    #[test]
    fn syntax_error_offset() {
        let err = Expr::parse("2 + * x", "x").unwrap_err();
        assert!(matches!(err, Error::Syntax { offset: 4, .. }), "{err:?}");
    }

    #[test]
    fn unknown_identifier() {
        let err = Expr::parse("2 + y", "x").unwrap_err();
        assert_eq!(
            err,
            Error::UnknownIdentifier {
                offset: 4,
                name: "y".into()
            }
        );
    }

    #[test]
    fn other_errors() {
        assert!(Expr::parse("", "x").is_err());
        assert!(Expr::parse("sin x", "x").is_err());
        assert!(Expr::parse("(1 + x", "x").is_err());
        assert!(Expr::parse("1 2", "x").is_err());
    }

    #[test]
    fn precedence_rules() {
        let e = Expr::parse("-x^2", "x").unwrap();
        assert_eq!(e.eval(3.0), -9.0);
        let e = Expr::parse("2^3^2", "x").unwrap();
        assert_eq!(e.eval(0.0), 512.0);
        let e = Expr::parse("2^-1", "x").unwrap();
        assert_eq!(e.eval(0.0), 0.5);
        let e = Expr::parse("8 / 2 / 2 - 1 - 1", "x").unwrap();
        assert_eq!(e.eval(0.0), 0.0);
        let e = Expr::parse("1.5e-1 * t", "t").unwrap();
        assert!((e.eval(2.0) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn derivative_of_rail() {
        let g = Expr::parse("2 + 0.3*sin(x)", "x").unwrap();
        let dg = g.derivative();
        for x in [-2.0, 0.0, 0.7, 3.0] {
            assert!((dg.eval(x) - 0.3 * f64::cos(x)).abs() < 1e-15);
        }
        let g = Expr::parse("x^x + sqrt(x) * exp(-x) / abs(x)", "x").unwrap();
        let dg = g.derivative();
        for x in [0.5, 1.3, 2.0] {
            let h = 1e-6;
            let fd = (g.eval(x + h) - g.eval(x - h)) / (2.0 * h);
            assert!((dg.eval(x) - fd).abs() < 1e-7, "{x}: {} vs {fd}", dg.eval(x));
        }
    }

    fn node() -> impl Strategy<Value = Node> {
        let leaf = prop_oneof![
            (0.0f64..100.0).prop_map(Node::Num),
            Just(Node::Var),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            let op = prop_oneof![
                Just(BinaryOp::Add),
                Just(BinaryOp::Sub),
                Just(BinaryOp::Mul),
                Just(BinaryOp::Div),
                Just(BinaryOp::Pow),
            ];
            let func = (0usize..Func::ALL.len()).prop_map(|k| Func::ALL[k]);
            prop_oneof![
                inner.clone().prop_map(|a| Node::Neg(Box::new(a))),
                (op, inner.clone(), inner.clone())
                    .prop_map(|(op, a, b)| Node::Binary(op, Box::new(a), Box::new(b))),
                (func, inner).prop_map(|(f, a)| Node::Call(f, Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn printer_round_trips(root in node()) {
            let e = Expr::from_node(root, "x");
            let text = e.to_string();
            let back = Expr::parse(&text, "x").unwrap();
            prop_assert_eq!(back, e, "{}", text);
        }
    }
}
