//! Restricted expression grammar for user-supplied time functions.
//!
//! Supported: `+ - * / ^`, unary minus, parentheses, the functions
//! `sin cos sqrt atan`, the constant `pi`, the free variable `t`, and any
//! parameters bound at parse time (e.g. `omega`, `r0`, `theta0`, `tau`).
//! Parameters are substituted as constants, so the compiled tree is plain
//! data — cheap to evaluate and safe to share across threads.

use std::fmt;

#[derive(Clone, Debug)]
enum Node {
    Const(f64),
    Time,
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Sin(Box<Node>),
    Cos(Box<Node>),
    Sqrt(Box<Node>),
    Atan(Box<Node>),
}

impl Node {
    fn eval(&self, t: f64) -> f64 {
        match self {
            Node::Const(v) => *v,
            Node::Time => t,
            Node::Add(a, b) => a.eval(t) + b.eval(t),
            Node::Sub(a, b) => a.eval(t) - b.eval(t),
            Node::Mul(a, b) => a.eval(t) * b.eval(t),
            Node::Div(a, b) => a.eval(t) / b.eval(t),
            Node::Pow(a, b) => a.eval(t).powf(b.eval(t)),
            Node::Neg(a) => -a.eval(t),
            Node::Sin(a) => a.eval(t).sin(),
            Node::Cos(a) => a.eval(t).cos(),
            Node::Sqrt(a) => a.eval(t).sqrt(),
            Node::Atan(a) => a.eval(t).atan(),
        }
    }
}

/// A compiled expression in the free variable `t`.
#[derive(Clone, Debug)]
pub struct TimeExpr {
    root: Node,
}

/// Parse failure with position information.
#[derive(Debug, Clone)]
pub struct ExprError {
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for ExprError {}

impl TimeExpr {
    /// Compile `src`, binding `params` as named constants.
    pub fn parse(src: &str, params: &[(&str, f64)]) -> Result<TimeExpr, ExprError> {
        let tokens = tokenize(src)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            params,
            src,
        };
        let root = parser.expression()?;
        if parser.pos != parser.tokens.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(TimeExpr { root })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.root.eval(t)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ExprError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // exponent suffix like 1e-5
                if i < bytes.len()
                    && matches!(bytes[i] as char, 'e' | 'E')
                    && i + 1 < bytes.len()
                    && matches!(bytes[i + 1] as char, '0'..='9' | '+' | '-')
                {
                    i += 2;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
                let text = &src[start..i];
                let value = text.parse::<f64>().map_err(|_| ExprError {
                    message: format!("invalid number `{text}` in `{src}`"),
                })?;
                out.push(Token::Number(value));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && matches!(bytes[i] as char, 'a'..='z' | 'A'..='Z' | '0'..='9' | '_')
                {
                    i += 1;
                }
                out.push(Token::Ident(src[start..i].to_string()));
            }
            other => {
                return Err(ExprError {
                    message: format!("unexpected character `{other}` in `{src}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    params: &'a [(&'a str, f64)],
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn error(&self, message: &str) -> ExprError {
        ExprError {
            message: format!("{message} in `{}`", self.src),
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, token: Token, what: &str) -> Result<(), ExprError> {
        if self.advance().as_ref() == Some(&token) {
            Ok(())
        } else {
            Err(self.error(what))
        }
    }

    fn expression(&mut self) -> Result<Node, ExprError> {
        let mut node = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    node = Node::Add(Box::new(node), Box::new(self.term()?));
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    node = Node::Sub(Box::new(node), Box::new(self.term()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut node = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    node = Node::Mul(Box::new(node), Box::new(self.unary()?));
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    node = Node::Div(Box::new(node), Box::new(self.unary()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            // right associative, binds tighter than unary minus on the left
            let exponent = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        match self.advance() {
            Some(Token::Number(v)) => Ok(Node::Const(v)),
            Some(Token::LParen) => {
                let inner = self.expression()?;
                self.expect(Token::RParen, "expected `)`")?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "sin" | "cos" | "sqrt" | "atan" => {
                    self.expect(Token::LParen, "function call needs `(`")?;
                    let arg = Box::new(self.expression()?);
                    self.expect(Token::RParen, "expected `)`")?;
                    Ok(match name.as_str() {
                        "sin" => Node::Sin(arg),
                        "cos" => Node::Cos(arg),
                        "sqrt" => Node::Sqrt(arg),
                        _ => Node::Atan(arg),
                    })
                }
                "pi" => Ok(Node::Const(std::f64::consts::PI)),
                "t" => Ok(Node::Time),
                other => {
                    if let Some((_, v)) = self.params.iter().find(|(k, _)| *k == other) {
                        Ok(Node::Const(*v))
                    } else {
                        Err(self.error(&format!("unknown identifier `{other}`")))
                    }
                }
            },
            _ => Err(self.error("expected a value")),
        }
    }
}
