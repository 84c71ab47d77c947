use super::{ExprError, Expr, Func, Node, Var};

const MAX_BUMP_ORDER: u32 = 16;
const MAX_EXPONENT: i64 = 64;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, bool),
    Ident(String),
    Sym(char),
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn syntax(pos: usize, msg: impl Into<String>) -> ExprError {
    ExprError::Syntax {
        pos,
        msg: msg.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut integer = true;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                integer = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    integer = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit: String = chars[start..i].iter().collect();
            let value: f64 = lit
                .parse()
                .map_err(|_| syntax(pos, format!("bad number `{lit}`")))?;
            if !value.is_finite() {
                return Err(syntax(pos, format!("number `{lit}` out of range")));
            }
            out.push(Token {
                tok: Tok::Num(value, integer),
                pos,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            if i < chars.len() && chars[i] == '\'' {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                pos,
            });
        } else if "+-*/^();,".contains(c) {
            out.push(Token {
                tok: Tok::Sym(c),
                pos,
            });
            i += 1;
        } else {
            return Err(syntax(pos, format!("unexpected character `{c}`")));
        }
    }
    out.push(Token {
        tok: Tok::End,
        pos: chars.len() + 1,
    });
    Ok(out)
}

enum Ident {
    Var(Var),
    Pi,
    Func(Func),
    Bump(u32),
}

fn index_suffix(digits: &str, dim: usize) -> Option<usize> {
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let k: usize = digits.parse().ok()?;
    (1..=dim).contains(&k).then(|| k - 1)
}

fn resolve(name: &str, dim: usize) -> Option<Ident> {
    let id = match name {
        "pi" => Ident::Pi,
        "s" => Ident::Var(Var::S),
        "sp" | "s'" => Ident::Var(Var::Sp),
        "sin" => Ident::Func(Func::Sin),
        "cos" => Ident::Func(Func::Cos),
        "exp" => Ident::Func(Func::Exp),
        "abs" => Ident::Func(Func::Abs),
        "sgn" => Ident::Func(Func::Sgn),
        "bump" => Ident::Bump(0),
        _ => {
            if let Some(k) = name.strip_prefix("bump_d") {
                let k: u32 = k.parse().ok().filter(|_| !k.starts_with('0'))?;
                return (k <= MAX_BUMP_ORDER).then_some(Ident::Bump(k));
            }
            if let Some(rest) = name.strip_prefix('q') {
                return index_suffix(rest, dim).map(|i| Ident::Var(Var::Q(i)));
            }
            if let Some(rest) = name.strip_prefix('p') {
                return index_suffix(rest, dim).map(|i| Ident::Var(Var::P(i)));
            }
            return None;
        }
    };
    Some(id)
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek().tok == Tok::Sym(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            let t = self.peek();
            Err(syntax(t.pos, format!("expected `{c}`, found {}", describe(&t.tok))))
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat('-') {
            Ok(Node::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let mut base = self.primary()?;
        while self.eat('^') {
            let paren = self.eat('(');
            let negative = self.eat('-');
            let t = self.next();
            let n = match t.tok {
                Tok::Num(v, true) if v <= MAX_EXPONENT as f64 => v as i32,
                Tok::Num(_, true) => return Err(syntax(t.pos, "exponent too large")),
                other => {
                    return Err(syntax(
                        t.pos,
                        format!("expected integer exponent, found {}", describe(&other)),
                    ))
                }
            };
            if paren {
                self.expect(')')?;
            }
            base = Node::Pow(Box::new(base), if negative { -n } else { n });
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        let t = self.next();
        match t.tok {
            Tok::Num(v, _) => Ok(Node::Num(v)),
            Tok::Sym('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let id = resolve(&name, self.dim).ok_or_else(|| ExprError::UnknownIdentifier {
                    name: name.clone(),
                    pos: t.pos,
                })?;
                match id {
                    Ident::Pi => Ok(Node::Pi),
                    Ident::Var(v) => Ok(Node::Var(v)),
                    Ident::Func(f) => {
                        let mut args = self.args()?;
                        check_arity(&name, 1, args.len(), t.pos)?;
                        Ok(Node::Call(f, Box::new(args.remove(0))))
                    }
                    Ident::Bump(order) => {
                        let mut args = self.args()?;
                        check_arity(&name, 2, args.len(), t.pos)?;
                        let radius = args.pop().expect("two arguments");
                        let r = args.pop().expect("two arguments");
                        Ok(Node::Bump {
                            order,
                            r: Box::new(r),
                            radius: Box::new(radius),
                        })
                    }
                }
            }
            other => Err(syntax(t.pos, format!("unexpected {}", describe(&other)))),
        }
    }

    fn args(&mut self) -> Result<Vec<Node>, ExprError> {
        self.expect('(')?;
        let mut args = Vec::new();
        if self.eat(')') {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(')') {
                return Ok(args);
            }
            if !(self.eat(';') || self.eat(',')) {
                let t = self.peek();
                return Err(syntax(
                    t.pos,
                    format!("expected `;` or `)`, found {}", describe(&t.tok)),
                ));
            }
        }
    }
}

fn check_arity(name: &str, expected: usize, found: usize, pos: usize) -> Result<(), ExprError> {
    if expected == found {
        Ok(())
    } else {
        Err(ExprError::Arity {
            name: name.to_string(),
            expected,
            found,
            pos,
        })
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Num(v, _) => format!("number {v}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::End => "end of input".to_string(),
    }
}

/// Parses `text` with variables `q1..qn`, `p1..pn`, `s`, `sp` where `n = dim`.
///
/// Error positions are 1-based character offsets; running off the end
/// reports `len + 1`.
pub fn parse(text: &str, dim: usize) -> Result<Expr, ExprError> {
    let mut parser = Parser {
        tokens: tokenize(text)?,
        at: 0,
        dim,
    };
    let root = parser.expr()?;
    let t = parser.peek();
    if t.tok != Tok::End {
        return Err(syntax(t.pos, format!("unexpected {}", describe(&t.tok))));
    }
    Ok(Expr::new(root, dim))
}
