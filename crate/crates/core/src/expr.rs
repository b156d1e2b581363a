//! Arithmetic expressions in the coordinates of `x` (and `y`), evaluated in
//! complex arithmetic.
//!
//! Grammar: `+ - * / ^`, parentheses, numbers, the constants `pi` and `i`,
//! and the functions `sin cos exp sqrt abs`. In one dimension the variables
//! are `x` and `y`; in `d` dimensions they are `x1..xd` and `y1..yd`.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(Complex64),
    /// Index into the concatenated coordinate vector `[x.., y..]`.
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A compiled expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
    arity: usize,
    d: usize,
    uses_imaginary: bool,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(src: &str) -> std::result::Result<Vec<Token>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                k += 1;
            }
            if k < chars.len() && (chars[k] == 'e' || chars[k] == 'E') {
                let save = k;
                k += 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                } else {
                    k = save;
                }
            }
            let text: String = chars[start..k].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| format!("bad number `{text}`"))?;
            out.push(Token::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_alphanumeric() || chars[k] == '_') {
                k += 1;
            }
            out.push(Token::Ident(chars[start..k].iter().collect()));
        } else if "+-*/^".contains(c) {
            out.push(Token::Op(c));
            k += 1;
        } else if c == '(' {
            out.push(Token::LParen);
            k += 1;
        } else if c == ')' {
            out.push(Token::RParen);
            k += 1;
        } else {
            return Err(format!("unexpected character `{c}`"));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    d: usize,
    arity: usize,
    uses_imaginary: &'a mut bool,
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

    fn expr(&mut self) -> std::result::Result<Node, String> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> std::result::Result<Node, String> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Node::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> std::result::Result<Node, String> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    // right associative, binds tighter than unary minus: -x^2 == -(x^2)
    fn power(&mut self) -> std::result::Result<Node, String> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> std::result::Result<Node, String> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Node::Const(Complex64::new(v, 0.0))),
            Some(Token::LParen) => {
                let e = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(e),
                    _ => Err("missing `)`".into()),
                }
            }
            Some(Token::Ident(name)) => {
                if let Some(Token::LParen) = self.peek() {
                    let f = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "exp" => Func::Exp,
                        "sqrt" => Func::Sqrt,
                        "abs" => Func::Abs,
                        other => return Err(format!("unknown function `{other}`")),
                    };
                    self.pos += 1;
                    let arg = self.expr()?;
                    match self.next() {
                        Some(Token::RParen) => Ok(Node::Call(f, Box::new(arg))),
                        _ => Err(format!("missing `)` after argument of `{name}`")),
                    }
                } else {
                    self.ident(&name)
                }
            }
            Some(t) => Err(format!("unexpected token {t:?}")),
            None => Err("unexpected end of expression".into()),
        }
    }

    fn ident(&mut self, name: &str) -> std::result::Result<Node, String> {
        match name {
            "pi" => return Ok(Node::Const(Complex64::new(std::f64::consts::PI, 0.0))),
            "i" => {
                *self.uses_imaginary = true;
                return Ok(Node::Const(Complex64::new(0.0, 1.0)));
            }
            _ => {}
        }
        let (slot, rest) = match name.split_at_checked(1) {
            Some(("x", rest)) => (0, rest),
            Some(("y", rest)) => (1, rest),
            _ => return Err(format!("unknown identifier `{name}`")),
        };
        if slot >= self.arity {
            return Err(format!("`{name}` is not available in a function of x only"));
        }
        let comp = if rest.is_empty() {
            if self.d != 1 {
                return Err(format!(
                    "in dimension {} use component names like `{name}1`",
                    self.d
                ));
            }
            0
        } else {
            match rest.parse::<usize>() {
                Ok(c) if c >= 1 && c <= self.d => c - 1,
                _ => return Err(format!("unknown identifier `{name}`")),
            }
        };
        Ok(Node::Var(slot * self.d + comp))
    }
}

impl Expr {
    /// Compiles `source` for a function of `arity` points (1 for `x`, 2 for
    /// `x, y`) in dimension `d`.
    pub fn parse(source: &str, d: usize, arity: usize) -> Result<Self> {
        let wrap = |msg: String| Error::Expr {
            expr: source.to_string(),
            msg,
        };
        let tokens = tokenize(source).map_err(wrap)?;
        let mut uses_imaginary = false;
        let mut parser = Parser {
            tokens,
            pos: 0,
            d,
            arity,
            uses_imaginary: &mut uses_imaginary,
        };
        let root = parser.expr().map_err(wrap)?;
        if parser.pos < parser.tokens.len() {
            return Err(wrap(format!(
                "trailing input starting at {:?}",
                parser.tokens[parser.pos]
            )));
        }
        Ok(Self {
            source: source.to_string(),
            root,
            arity,
            d,
            uses_imaginary,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Whether the imaginary unit appears literally.
    pub fn uses_imaginary(&self) -> bool {
        self.uses_imaginary
    }

    /// Evaluates at `x` (and `y` for arity 2).
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Complex64 {
        eval_node(&self.root, self.d, x, y)
    }
}

fn eval_node(node: &Node, d: usize, x: &[f64], y: &[f64]) -> Complex64 {
    let ev = |n: &Node| eval_node(n, d, x, y);
    match node {
        Node::Const(c) => *c,
        Node::Var(k) => {
            let v = if *k < d { x[*k] } else { y[*k - d] };
            Complex64::new(v, 0.0)
        }
        Node::Neg(a) => -ev(a),
        Node::Add(a, b) => ev(a) + ev(b),
        Node::Sub(a, b) => ev(a) - ev(b),
        Node::Mul(a, b) => ev(a) * ev(b),
        Node::Div(a, b) => ev(a) / ev(b),
        Node::Pow(a, b) => {
            let base = ev(a);
            let exp = ev(b);
            if exp.im == 0.0 && exp.re.fract() == 0.0 && exp.re.abs() <= i32::MAX as f64 {
                base.powi(exp.re as i32)
            } else if base.im == 0.0 && exp.im == 0.0 && base.re >= 0.0 {
                Complex64::new(base.re.powf(exp.re), 0.0)
            } else {
                // -0.0 imaginary parts would select the lower branch
                Complex64::new(base.re, base.im + 0.0).powc(exp)
            }
        }
        Node::Call(f, a) => {
            let v = ev(a);
            match f {
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Exp => v.exp(),
                Func::Sqrt => {
                    if v.im == 0.0 && v.re >= 0.0 {
                        Complex64::new(v.re.sqrt(), 0.0)
                    } else {
                        v.sqrt()
                    }
                }
                Func::Abs => Complex64::new(v.norm(), 0.0),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev1(src: &str, x: f64) -> Complex64 {
        Expr::parse(src, 1, 1).unwrap().eval(&[x], &[])
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev1("1 + 2 * 3", 0.0).re, 7.0);
        assert_eq!(ev1("-x^2", 3.0).re, -9.0);
        assert_eq!(ev1("2^3^2", 0.0).re, 512.0);
        assert_eq!(ev1("(1 + 2) * 3 - 4 / 2", 0.0).re, 7.0);
        assert_eq!(ev1("2.5e-1 * 4", 0.0).re, 1.0);
    }

    #[test]
    fn functions_and_constants() {
        let v = ev1("1 + sin(x)^2", 0.3).re;
        assert!((v - (1.0 + 0.3f64.sin().powi(2))).abs() < 1e-15);
        assert!((ev1("cos(pi)", 0.0).re + 1.0).abs() < 1e-15);
        assert_eq!(ev1("abs(-2) + sqrt(9) + exp(0)", 0.0).re, 6.0);
        let z = ev1("2 * i", 0.0);
        assert_eq!(z, Complex64::new(0.0, 2.0));
    }

    #[test]
    fn two_point_variables() {
        let e = Expr::parse("x - 2*y", 1, 2).unwrap();
        assert_eq!(e.eval(&[1.0], &[3.0]).re, -5.0);
        let e2 = Expr::parse("x1 * y2 + x2", 2, 2).unwrap();
        assert_eq!(e2.eval(&[2.0, 5.0], &[7.0, 3.0]).re, 11.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Expr::parse("y", 1, 1).is_err());
        assert!(Expr::parse("x", 2, 1).is_err());
        assert!(Expr::parse("x3", 2, 1).is_err());
        assert!(Expr::parse("tan(x)", 1, 1).is_err());
        assert!(Expr::parse("1 +", 1, 1).is_err());
        assert!(Expr::parse("(1", 1, 1).is_err());
        assert!(Expr::parse("1 2", 1, 1).is_err());
        assert!(Expr::parse("x $ 2", 1, 1).is_err());
    }

    #[test]
    fn fractional_power_of_negative_is_complex() {
        let v = ev1("(-1)^0.5", 0.0);
        assert!((v - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }
}
