//! The `.sd` source language.
//!
//! ```text
//! wire q2 = quantum 2
//! wire c2 = classical 2
//! gen H : q2 -> q2 = [[0.7071+0i, 0.7071+0i], [0.7071+0i, -0.7071+0i]]
//! diagram d = H ; dagger(H)
//! smatrix S = H * H
//! channel noise = depolarizing(q2, 0.3)
//! ```
//!
//! `;` composes left to right in time and binds looser than `*`. Every name
//! lives in one namespace and must be declared before use.

mod lexer;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::cpm::{self, Channel, CpmError};
use crate::diagram::{validate, Diagram, DiagramError, Generator, ObjectWord, WireKind, WireType};
use crate::linalg::CMatrix;
use crate::smatrix::{SMatrix, SMatrixError};
use crate::tensor::{self, ComplexTensor, EvalError};

use lexer::{lex, Tok, Token};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("syntax error at {line}:{col}: expected {expected}")]
    Syntax {
        line: usize,
        col: usize,
        expected: String,
    },
    #[error("undefined name `{name}` at {line}:{col}")]
    UndefinedName { line: usize, col: usize, name: String },
    #[error("`{name}` at {line}:{col} is not a {expected}")]
    WrongKind {
        line: usize,
        col: usize,
        name: String,
        expected: &'static str,
    },
    #[error("shape error on line {line}: {message}")]
    Shape { line: usize, message: String },
    #[error("`{name}` redefined at {line}:{col}")]
    Redefinition { line: usize, col: usize, name: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProgramError {
    #[error("no declaration named `{0}`")]
    UnknownName(String),
    #[error("`{name}` is not a {expected}")]
    WrongKind { name: String, expected: &'static str },
    #[error("`{name}` must have equal domain and codomain, found {dom} -> {cod}")]
    NotEndomorphism {
        name: String,
        dom: ObjectWord,
        cod: ObjectWord,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Cpm(#[from] CpmError),
    #[error(transparent)]
    SMatrix(#[from] SMatrixError),
}

/// Diagram expression as written, with names unresolved.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Name(String),
    Id(Vec<String>),
    Seq(Box<Expr>, Box<Expr>),
    Par(Box<Expr>, Box<Expr>),
    Dagger(Box<Expr>),
    Swap(String, String),
    Cup(String),
    Cap(String),
    Copy(String),
    Delete(String),
    Discard(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelDef {
    Depolarizing { wire: String, lambda: f64 },
    Decoherence { wire: String },
    Double(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decl {
    Wire {
        name: String,
        ty: WireType,
    },
    Gen {
        name: String,
        dom: Vec<String>,
        cod: Vec<String>,
        matrix: Option<Vec<Vec<Complex64>>>,
        generator: Arc<Generator>,
    },
    Diagram {
        name: String,
        expr: Expr,
    },
    SMatrix {
        name: String,
        expr: Expr,
    },
    Channel {
        name: String,
        def: ChannelDef,
    },
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Wire { name, .. }
            | Decl::Gen { name, .. }
            | Decl::Diagram { name, .. }
            | Decl::SMatrix { name, .. }
            | Decl::Channel { name, .. } => name,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Decl::Wire { .. } => "wire",
            Decl::Gen { .. } => "generator",
            Decl::Diagram { .. } => "diagram",
            Decl::SMatrix { .. } => "smatrix",
            Decl::Channel { .. } => "channel",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    decls: Vec<Decl>,
    index: HashMap<String, usize>,
}

const KEYWORDS: &[&str] = &[
    "I", "wire", "gen", "diagram", "smatrix", "channel", "quantum", "classical", "id", "dagger",
    "swap", "cup", "cap", "copy", "delete", "discard", "depolarizing", "decoherence", "double",
];

pub fn parse(text: &str) -> Result<Program, DslError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        program: Program::default(),
    };
    p.program()?;
    Ok(p.program)
}

impl Program {
    pub fn decls(&self) -> &[Decl] {
        &self.decls
    }

    pub fn get(&self, name: &str) -> Option<&Decl> {
        self.index.get(name).map(|&i| &self.decls[i])
    }

    fn names_of(&self, kind: &str) -> Vec<&str> {
        self.decls
            .iter()
            .filter(|d| d.kind() == kind)
            .map(Decl::name)
            .collect()
    }

    pub fn wires(&self) -> Vec<(&str, WireType)> {
        self.decls
            .iter()
            .filter_map(|d| match d {
                Decl::Wire { name, ty } => Some((name.as_str(), *ty)),
                _ => None,
            })
            .collect()
    }

    pub fn diagram_names(&self) -> Vec<&str> {
        self.names_of("diagram")
    }

    pub fn smatrix_names(&self) -> Vec<&str> {
        self.names_of("smatrix")
    }

    pub fn channel_names(&self) -> Vec<&str> {
        self.names_of("channel")
    }

    fn lookup(&self, name: &str) -> Result<&Decl, ProgramError> {
        self.get(name)
            .ok_or_else(|| ProgramError::UnknownName(name.to_string()))
    }

    fn wire(&self, name: &str) -> Result<WireType, ProgramError> {
        match self.lookup(name)? {
            Decl::Wire { ty, .. } => Ok(*ty),
            _ => Err(ProgramError::WrongKind {
                name: name.to_string(),
                expected: "wire",
            }),
        }
    }

    fn word(&self, names: &[String]) -> Result<ObjectWord, ProgramError> {
        Ok(ObjectWord::new(
            names.iter().map(|n| self.wire(n)).collect::<Result<_, _>>()?,
        ))
    }

    /// Lowers an expression to the IR. The result is not validated.
    pub fn lower(&self, e: &Expr) -> Result<Diagram, ProgramError> {
        Ok(match e {
            Expr::Name(n) => match self.lookup(n)? {
                Decl::Gen { generator, .. } => Diagram::Gen(generator.clone()),
                Decl::Diagram { expr, .. } => self.lower(expr)?,
                _ => {
                    return Err(ProgramError::WrongKind {
                        name: n.clone(),
                        expected: "generator or diagram",
                    })
                }
            },
            Expr::Id(w) => Diagram::Id(self.word(w)?),
            Expr::Seq(a, b) => Diagram::seq(self.lower(a)?, self.lower(b)?),
            Expr::Par(a, b) => Diagram::par(self.lower(a)?, self.lower(b)?),
            Expr::Dagger(a) => Diagram::dagger_node(self.lower(a)?),
            Expr::Swap(a, b) => Diagram::Swap(self.wire(a)?, self.wire(b)?),
            Expr::Cup(w) => Diagram::Cup(self.wire(w)?),
            Expr::Cap(w) => Diagram::Cap(self.wire(w)?),
            Expr::Copy(w) => Diagram::Copy(self.wire(w)?),
            Expr::Delete(w) => Diagram::Delete(self.wire(w)?),
            Expr::Discard(w) => Diagram::Discard(self.wire(w)?),
        })
    }

    /// A named diagram or generator as an (unvalidated) IR term.
    pub fn diagram(&self, name: &str) -> Result<Diagram, ProgramError> {
        self.lower(&Expr::Name(name.to_string()))
    }

    pub fn smatrix(&self, name: &str) -> Result<SMatrix, ProgramError> {
        let Decl::SMatrix { expr, .. } = self.lookup(name)? else {
            return Err(ProgramError::WrongKind {
                name: name.to_string(),
                expected: "smatrix",
            });
        };
        let d = self.lower(expr)?;
        let (dom, cod) = validate(&d)?;
        if dom != cod {
            return Err(ProgramError::NotEndomorphism {
                name: name.to_string(),
                dom,
                cod,
            });
        }
        let m = tensor::evaluate_matrix(&d)?;
        Ok(SMatrix::new(dom, m)?)
    }

    pub fn channel(&self, name: &str) -> Result<Channel, ProgramError> {
        let Decl::Channel { def, .. } = self.lookup(name)? else {
            return Err(ProgramError::WrongKind {
                name: name.to_string(),
                expected: "channel",
            });
        };
        Ok(match def {
            ChannelDef::Depolarizing { wire, lambda } => {
                if !(0.0..=1.0).contains(lambda) {
                    return Err(ProgramError::InvalidParameter(format!(
                        "depolarizing strength {lambda} outside [0, 1]"
                    )));
                }
                cpm::depolarizing(self.wire(wire)?.dim(), *lambda)
            }
            ChannelDef::Decoherence { wire } => cpm::decoherence(self.wire(wire)?.dim()),
            ChannelDef::Double(e) => cpm::double(&self.lower(e)?)?,
        })
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    program: Program,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: impl Into<String>) -> Result<T, DslError> {
        let t = self.peek();
        Err(DslError::Syntax {
            line: t.line,
            col: t.col,
            expected: format!("{}, found {}", expected.into(), t.tok.describe()),
        })
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek().tok == Tok::Sym(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), DslError> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            self.fail(format!("`{c}`"))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> Result<Token, DslError> {
        match &self.peek().tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => Ok(self.next()),
            _ => self.fail("a name"),
        }
    }

    fn ident_text(t: &Token) -> String {
        match &t.tok {
            Tok::Ident(s) => s.clone(),
            _ => unreachable!("ident token"),
        }
    }

    /// A previously declared name of the given kind(s).
    fn reference(&mut self, kinds: &[&'static str], expected: &'static str) -> Result<String, DslError> {
        let t = self.ident()?;
        let name = Self::ident_text(&t);
        match self.program.get(&name) {
            None => Err(DslError::UndefinedName {
                line: t.line,
                col: t.col,
                name,
            }),
            Some(d) if !kinds.contains(&d.kind()) => Err(DslError::WrongKind {
                line: t.line,
                col: t.col,
                name,
                expected,
            }),
            Some(_) => Ok(name),
        }
    }

    fn wire_ref(&mut self) -> Result<String, DslError> {
        self.reference(&["wire"], "wire")
    }

    fn fresh_name(&mut self) -> Result<String, DslError> {
        let t = self.ident()?;
        let name = Self::ident_text(&t);
        if self.program.index.contains_key(&name) {
            return Err(DslError::Redefinition {
                line: t.line,
                col: t.col,
                name,
            });
        }
        Ok(name)
    }

    fn program(&mut self) -> Result<(), DslError> {
        loop {
            match &self.peek().tok {
                Tok::Eof => return Ok(()),
                Tok::Newline => {
                    self.next();
                }
                _ => {
                    let decl = self.decl()?;
                    if !matches!(self.peek().tok, Tok::Newline | Tok::Eof) {
                        return self.fail("end of line");
                    }
                    let i = self.program.decls.len();
                    self.program.index.insert(decl.name().to_string(), i);
                    self.program.decls.push(decl);
                }
            }
        }
    }

    fn decl(&mut self) -> Result<Decl, DslError> {
        let head = match &self.peek().tok {
            Tok::Ident(s) => s.clone(),
            _ => return self.fail("a declaration keyword"),
        };
        match head.as_str() {
            "wire" => {
                self.next();
                let name = self.fresh_name()?;
                self.expect_sym('=')?;
                let kind = if self.is_keyword("quantum") {
                    WireKind::Quantum
                } else if self.is_keyword("classical") {
                    WireKind::Classical
                } else {
                    return self.fail("`quantum` or `classical`");
                };
                self.next();
                let dim = match self.peek().tok {
                    Tok::Num(x) if x >= 1.0 && x.fract() == 0.0 && x <= u32::MAX as f64 => x as usize,
                    _ => return self.fail("a positive integer dimension"),
                };
                self.next();
                let ty = WireType::new(kind, dim).expect("dim >= 1");
                Ok(Decl::Wire { name, ty })
            }
            "gen" => {
                let line = self.next().line;
                let name = self.fresh_name()?;
                self.expect_sym(':')?;
                let dom = self.word()?;
                if self.peek().tok != Tok::Arrow {
                    return self.fail("`->`");
                }
                self.next();
                let cod = self.word()?;
                let matrix = if self.eat_sym('=') {
                    Some(self.matrix()?)
                } else {
                    None
                };
                let generator = self.build_generator(line, &name, &dom, &cod, matrix.as_deref())?;
                Ok(Decl::Gen {
                    name,
                    dom,
                    cod,
                    matrix,
                    generator: Arc::new(generator),
                })
            }
            "diagram" | "smatrix" => {
                self.next();
                let name = self.fresh_name()?;
                self.expect_sym('=')?;
                let expr = self.expr()?;
                Ok(if head == "diagram" {
                    Decl::Diagram { name, expr }
                } else {
                    Decl::SMatrix { name, expr }
                })
            }
            "channel" => {
                self.next();
                let name = self.fresh_name()?;
                self.expect_sym('=')?;
                let def = self.channel_def()?;
                Ok(Decl::Channel { name, def })
            }
            _ => self.fail("`wire`, `gen`, `diagram`, `smatrix` or `channel`"),
        }
    }

    fn word(&mut self) -> Result<Vec<String>, DslError> {
        if self.is_keyword("I") {
            self.next();
            return Ok(Vec::new());
        }
        let mut names = vec![self.wire_ref()?];
        while self.eat_sym('*') {
            names.push(self.wire_ref()?);
        }
        Ok(names)
    }

    fn real(&mut self) -> Result<f64, DslError> {
        let neg = if self.eat_sym('-') {
            true
        } else {
            self.eat_sym('+');
            false
        };
        match self.peek().tok {
            Tok::Num(x) => {
                self.next();
                Ok(if neg { -x } else { x })
            }
            _ => self.fail("a real number"),
        }
    }

    fn complex(&mut self) -> Result<Complex64, DslError> {
        let re = self.real()?;
        let sign = if self.eat_sym('+') {
            1.0
        } else if self.eat_sym('-') {
            -1.0
        } else {
            return Ok(Complex64::new(re, 0.0));
        };
        match self.peek().tok {
            Tok::Imag(x) => {
                self.next();
                Ok(Complex64::new(re, sign * x))
            }
            _ => self.fail("an imaginary part such as `0i`"),
        }
    }

    fn matrix(&mut self) -> Result<Vec<Vec<Complex64>>, DslError> {
        self.expect_sym('[')?;
        let mut rows = Vec::new();
        loop {
            self.expect_sym('[')?;
            let mut row = vec![self.complex()?];
            while self.eat_sym(',') {
                row.push(self.complex()?);
            }
            self.expect_sym(']')?;
            rows.push(row);
            if !self.eat_sym(',') {
                break;
            }
        }
        self.expect_sym(']')?;
        Ok(rows)
    }

    fn build_generator(
        &self,
        line: usize,
        name: &str,
        dom: &[String],
        cod: &[String],
        matrix: Option<&[Vec<Complex64>]>,
    ) -> Result<Generator, DslError> {
        let word = |names: &[String]| {
            ObjectWord::new(
                names
                    .iter()
                    .map(|n| match self.program.get(n) {
                        Some(Decl::Wire { ty, .. }) => *ty,
                        _ => unreachable!("checked by wire_ref"),
                    })
                    .collect(),
            )
        };
        let (dom, cod) = (word(dom), word(cod));
        let payload = match matrix {
            None => None,
            Some(rows) => {
                let (r, c) = (cod.total_dim(), dom.total_dim());
                if rows.len() != r || rows.iter().any(|row| row.len() != c) {
                    let widths: Vec<usize> = rows.iter().map(Vec::len).collect();
                    return Err(DslError::Shape {
                        line,
                        message: format!(
                            "generator `{name}` needs a {r}x{c} matrix, got {} rows of widths {widths:?}",
                            rows.len()
                        ),
                    });
                }
                let m = CMatrix::from_fn(r, c, |i, j| rows[i][j]);
                Some(ComplexTensor::from_matrix(&m, &cod.dims(), &dom.dims()))
            }
        };
        Generator::new(name, dom, cod, payload).map_err(|e| DslError::Shape {
            line,
            message: e.to_string(),
        })
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut e = self.par()?;
        while self.eat_sym(';') {
            e = Expr::Seq(Box::new(e), Box::new(self.par()?));
        }
        Ok(e)
    }

    fn par(&mut self) -> Result<Expr, DslError> {
        let mut e = self.atom()?;
        while self.eat_sym('*') {
            e = Expr::Par(Box::new(e), Box::new(self.atom()?));
        }
        Ok(e)
    }

    fn wire_call(&mut self) -> Result<String, DslError> {
        self.expect_sym('(')?;
        let w = self.wire_ref()?;
        self.expect_sym(')')?;
        Ok(w)
    }

    fn atom(&mut self) -> Result<Expr, DslError> {
        if self.eat_sym('(') {
            let e = self.expr()?;
            self.expect_sym(')')?;
            return Ok(e);
        }
        let head = match &self.peek().tok {
            Tok::Ident(s) => s.clone(),
            _ => return self.fail("a diagram expression"),
        };
        let builtin = |w| match head.as_str() {
            "cup" => Expr::Cup(w),
            "cap" => Expr::Cap(w),
            "copy" => Expr::Copy(w),
            "delete" => Expr::Delete(w),
            _ => Expr::Discard(w),
        };
        match head.as_str() {
            "id" => {
                self.next();
                self.expect_sym('(')?;
                let w = self.word()?;
                self.expect_sym(')')?;
                Ok(Expr::Id(w))
            }
            "dagger" => {
                self.next();
                self.expect_sym('(')?;
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(Expr::Dagger(Box::new(e)))
            }
            "swap" => {
                self.next();
                self.expect_sym('(')?;
                let a = self.wire_ref()?;
                self.expect_sym(',')?;
                let b = self.wire_ref()?;
                self.expect_sym(')')?;
                Ok(Expr::Swap(a, b))
            }
            "cup" | "cap" | "copy" | "delete" | "discard" => {
                self.next();
                let w = self.wire_call()?;
                Ok(builtin(w))
            }
            _ => Ok(Expr::Name(self.reference(&["generator", "diagram"], "generator or diagram")?)),
        }
    }

    fn channel_def(&mut self) -> Result<ChannelDef, DslError> {
        if self.is_keyword("depolarizing") {
            self.next();
            self.expect_sym('(')?;
            let wire = self.wire_ref()?;
            self.expect_sym(',')?;
            let lambda = self.real()?;
            self.expect_sym(')')?;
            Ok(ChannelDef::Depolarizing { wire, lambda })
        } else if self.is_keyword("decoherence") {
            self.next();
            Ok(ChannelDef::Decoherence {
                wire: self.wire_call()?,
            })
        } else if self.is_keyword("double") {
            self.next();
            self.expect_sym('(')?;
            let e = self.expr()?;
            self.expect_sym(')')?;
            Ok(ChannelDef::Double(e))
        } else {
            self.fail("`depolarizing`, `decoherence` or `double`")
        }
    }
}

fn fmt_word(names: &[String]) -> String {
    if names.is_empty() {
        "I".to_string()
    } else {
        names.join(" * ")
    }
}

fn fmt_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Name(n) => write!(f, "{n}"),
            Expr::Id(w) => write!(f, "id({})", fmt_word(w)),
            Expr::Seq(a, b) => {
                write!(f, "{a} ; ")?;
                match **b {
                    Expr::Seq(..) => write!(f, "({b})"),
                    _ => write!(f, "{b}"),
                }
            }
            Expr::Par(a, b) => {
                match **a {
                    Expr::Seq(..) => write!(f, "({a})")?,
                    _ => write!(f, "{a}")?,
                }
                write!(f, " * ")?;
                match **b {
                    Expr::Seq(..) | Expr::Par(..) => write!(f, "({b})"),
                    _ => write!(f, "{b}"),
                }
            }
            Expr::Dagger(a) => write!(f, "dagger({a})"),
            Expr::Swap(a, b) => write!(f, "swap({a}, {b})"),
            Expr::Cup(w) => write!(f, "cup({w})"),
            Expr::Cap(w) => write!(f, "cap({w})"),
            Expr::Copy(w) => write!(f, "copy({w})"),
            Expr::Delete(w) => write!(f, "delete({w})"),
            Expr::Discard(w) => write!(f, "discard({w})"),
        }
    }
}

impl fmt::Display for Decl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decl::Wire { name, ty } => {
                let kind = match ty.kind() {
                    WireKind::Quantum => "quantum",
                    WireKind::Classical => "classical",
                };
                write!(f, "wire {name} = {kind} {}", ty.dim())
            }
            Decl::Gen {
                name,
                dom,
                cod,
                matrix,
                ..
            } => {
                write!(f, "gen {name} : {} -> {}", fmt_word(dom), fmt_word(cod))?;
                if let Some(rows) = matrix {
                    let rows: Vec<String> = rows
                        .iter()
                        .map(|r| {
                            let cells: Vec<String> = r.iter().map(|z| fmt_complex(*z)).collect();
                            format!("[{}]", cells.join(", "))
                        })
                        .collect();
                    write!(f, " = [{}]", rows.join(", "))?;
                }
                Ok(())
            }
            Decl::Diagram { name, expr } => write!(f, "diagram {name} = {expr}"),
            Decl::SMatrix { name, expr } => write!(f, "smatrix {name} = {expr}"),
            Decl::Channel { name, def } => match def {
                ChannelDef::Depolarizing { wire, lambda } => {
                    write!(f, "channel {name} = depolarizing({wire}, {lambda})")
                }
                ChannelDef::Decoherence { wire } => write!(f, "channel {name} = decoherence({wire})"),
                ChannelDef::Double(e) => write!(f, "channel {name} = double({e})"),
            },
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.decls {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}
