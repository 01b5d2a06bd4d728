use std::collections::BTreeMap;

use thiserror::Error;

use super::lexer::{lex, Tok, Token};
use super::{Decl, Pos, Program, RESERVED_PREFIX};
use crate::ast::{
    split_typed_record, Branch, ChannelCtx, GlobalType, MCut, Name, ParamCtx, ProcEnv, Process, Record, RecordError,
    Type,
};
use crate::types::dual;

const KEYWORDS: &[&str] = &[
    "new", "let", "in", "proc", "type", "gtype", "case", "inl", "inr", "close", "wait", "link", "run", "def", "call",
    "ex", "all", "provide", "assume", "top", "bot", "mnew",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unexpected character `{ch}`")]
    Lex { pos: Pos, ch: char },
    #[error("expected {expected}, found {found}")]
    Syntax { pos: Pos, expected: String, found: String },
    #[error("duplicate declaration `{name}`")]
    DuplicateDeclaration { pos: Pos, name: Name },
    #[error("identifier `{name}` uses the reserved prefix `{RESERVED_PREFIX}`")]
    Reserved { pos: Pos, name: Name },
    #[error("{err}")]
    Record { pos: Pos, err: RecordError },
    #[error("unknown global type `{name}`")]
    UnknownGlobal { pos: Pos, name: Name },
    #[error("channel `{name}` listed twice")]
    DuplicateChannel { pos: Pos, name: Name },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Lex { pos, .. }
            | ParseError::Syntax { pos, .. }
            | ParseError::DuplicateDeclaration { pos, .. }
            | ParseError::Reserved { pos, .. }
            | ParseError::Record { pos, .. }
            | ParseError::UnknownGlobal { pos, .. }
            | ParseError::DuplicateChannel { pos, .. } => *pos,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ParseError::DuplicateDeclaration { .. } => "DuplicateDeclaration",
            _ => "SyntaxError",
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Accept identifiers with the reserved prefix, as produced by the translation.
    pub allow_reserved: bool,
}

pub fn parse(src: &str) -> Result<Program, ParseError> {
    parse_with(src, ParseOptions::default())
}

pub fn parse_with(src: &str, opts: ParseOptions) -> Result<Program, ParseError> {
    Parser::new(src, opts)?.program()
}

/// Parses a single process term with no aliases in scope.
pub fn parse_process(src: &str) -> Result<Process, ParseError> {
    parse_process_with(src, ParseOptions::default())
}

pub fn parse_process_with(src: &str, opts: ParseOptions) -> Result<Process, ParseError> {
    let mut p = Parser::new(src, opts)?;
    let t = p.process()?;
    p.expect(Tok::Eof)?;
    Ok(t)
}

pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    let mut p = Parser::new(src, ParseOptions::default())?;
    let t = p.ty()?;
    p.expect(Tok::Eof)?;
    Ok(t)
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    opts: ParseOptions,
    aliases: Vec<(Name, Type)>,
    globals: Vec<(Name, GlobalType)>,
    bound_tvars: Vec<Name>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(src: &str, opts: ParseOptions) -> PResult<Parser> {
        let toks = lex(src).map_err(|e| ParseError::Lex { pos: e.pos, ch: e.ch })?;
        Ok(Parser { toks, i: 0, opts, aliases: Vec::new(), globals: Vec::new(), bound_tvars: Vec::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].tok.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, expected: &str) -> PResult<T> {
        Err(ParseError::Syntax { pos: self.pos(), expected: expected.into(), found: self.peek().describe() })
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(&t.describe())
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.err(&format!("`{kw}`"))
        }
    }

    /// A non-keyword identifier.
    fn ident(&mut self, what: &str) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                if s.starts_with(RESERVED_PREFIX) && !self.opts.allow_reserved {
                    return Err(ParseError::Reserved { pos: self.pos(), name: s });
                }
                self.bump();
                Ok(s)
            }
            _ => self.err(what),
        }
    }

    fn record_err<T>(&self, pos: Pos, r: Result<T, RecordError>) -> PResult<T> {
        r.map_err(|err| ParseError::Record { pos, err })
    }

    // ----- programs -----

    fn program(&mut self) -> PResult<Program> {
        let mut prog = Program::default();
        loop {
            if *self.peek() == Tok::Eof {
                break;
            }
            let pos = self.pos();
            if self.eat_kw("type") {
                let name = self.ident("a type name")?;
                self.expect(Tok::Eq)?;
                let t = self.ty()?;
                if self.aliases.iter().any(|(n, _)| *n == name) {
                    return Err(ParseError::DuplicateDeclaration { pos, name });
                }
                self.aliases.push((name, t));
            } else if self.eat_kw("gtype") {
                let name = self.ident("a global type name")?;
                self.expect(Tok::Eq)?;
                self.expect(Tok::Lt)?;
                let g = self.global()?;
                self.expect(Tok::Gt)?;
                if self.globals.iter().any(|(n, _)| *n == name) {
                    return Err(ParseError::DuplicateDeclaration { pos, name });
                }
                self.globals.push((name, g));
            } else if self.eat_kw("proc") {
                let d = self.decl(pos)?;
                if prog.decls.iter().any(|e| e.name == d.name) {
                    return Err(ParseError::DuplicateDeclaration { pos, name: d.name });
                }
                prog.decls.push(d);
            } else {
                return self.err("`type`, `gtype` or `proc`");
            }
        }
        prog.aliases = std::mem::take(&mut self.aliases);
        prog.globals = std::mem::take(&mut self.globals);
        Ok(prog)
    }

    fn decl(&mut self, pos: Pos) -> PResult<Decl> {
        let name = self.ident("a declaration name")?;
        self.expect(Tok::LParen)?;
        let mut theta = ProcEnv::new();
        if *self.peek() != Tok::RParen {
            loop {
                let vpos = self.pos();
                let p = self.ident("a process variable")?;
                self.expect(Tok::Colon)?;
                let ctx = self.param_ctx_braced()?;
                if theta.insert(p.clone(), ctx).is_some() {
                    return Err(ParseError::DuplicateChannel { pos: vpos, name: p });
                }
                if *self.peek() != Tok::Comma {
                    break;
                }
                self.bump();
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::LParen)?;
        let gamma = self.channel_ctx(Tok::RParen)?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::Eq)?;
        let body = self.process()?;
        Ok(Decl { name, theta, gamma, body, pos })
    }

    fn channel_ctx(&mut self, close: Tok) -> PResult<ChannelCtx> {
        let mut gamma = ChannelCtx::new();
        if *self.peek() == close {
            return Ok(gamma);
        }
        loop {
            let cpos = self.pos();
            let x = self.ident("a channel name")?;
            self.expect(Tok::Colon)?;
            let t = self.ty()?;
            if gamma.insert(x.clone(), t).is_some() {
                return Err(ParseError::DuplicateChannel { pos: cpos, name: x });
            }
            if *self.peek() != Tok::Comma {
                return Ok(gamma);
            }
            self.bump();
        }
    }

    // ----- types -----

    pub(crate) fn ty(&mut self) -> PResult<Type> {
        let lhs = self.ty_mul()?;
        match self.peek() {
            Tok::Plus => {
                self.bump();
                Ok(Type::plus(lhs, self.ty()?))
            }
            Tok::Amp => {
                self.bump();
                Ok(Type::with(lhs, self.ty()?))
            }
            _ => Ok(lhs),
        }
    }

    fn ty_mul(&mut self) -> PResult<Type> {
        let lhs = self.ty_unary()?;
        match self.peek() {
            Tok::Star => {
                self.bump();
                Ok(Type::tensor(lhs, self.ty_mul()?))
            }
            Tok::At => {
                self.bump();
                Ok(Type::par(lhs, self.ty_mul()?))
            }
            _ => Ok(lhs),
        }
    }

    fn ty_unary(&mut self) -> PResult<Type> {
        match self.peek() {
            Tok::Quest => {
                self.bump();
                Ok(Type::why_not(self.ty_unary()?))
            }
            Tok::Bang => {
                self.bump();
                Ok(Type::of_course(self.ty_unary()?))
            }
            Tok::Tilde => {
                self.bump();
                Ok(dual(&self.ty_unary()?))
            }
            Tok::Ident(s) if s == "ex" || s == "all" => {
                let is_ex = s == "ex";
                self.bump();
                let x = self.ident("a type variable")?;
                self.expect(Tok::Dot)?;
                self.bound_tvars.push(x.clone());
                let body = self.ty();
                self.bound_tvars.pop();
                let body = Box::new(body?);
                Ok(if is_ex { Type::Exists(x, body) } else { Type::Forall(x, body) })
            }
            _ => self.ty_atom(),
        }
    }

    fn ty_atom(&mut self) -> PResult<Type> {
        match self.peek().clone() {
            Tok::Zero => {
                self.bump();
                Ok(Type::Zero)
            }
            Tok::One => {
                self.bump();
                Ok(Type::One)
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(s) if s == "top" => {
                self.bump();
                Ok(Type::Top)
            }
            Tok::Ident(s) if s == "bot" => {
                self.bump();
                Ok(Type::Bot)
            }
            Tok::Ident(s) if s == "provide" || s == "assume" => {
                self.bump();
                let c = self.param_ctx_braced()?;
                Ok(if s == "provide" { Type::Provide(c) } else { Type::Assume(c) })
            }
            Tok::Ident(_) => {
                let x = self.ident("a type")?;
                if !self.bound_tvars.contains(&x) {
                    if let Some((_, t)) = self.aliases.iter().find(|(n, _)| *n == x) {
                        return Ok(t.clone());
                    }
                }
                Ok(Type::Var(x))
            }
            _ => self.err("a type"),
        }
    }

    fn param_ctx_braced(&mut self) -> PResult<ParamCtx> {
        let pos = self.pos();
        self.expect(Tok::LBrace)?;
        let mut entries = Vec::new();
        if *self.peek() != Tok::RBrace {
            loop {
                let l = self.ident("a label")?;
                self.expect(Tok::Colon)?;
                entries.push((l, self.ty()?));
                if *self.peek() != Tok::Comma {
                    break;
                }
                self.bump();
            }
        }
        self.expect(Tok::RBrace)?;
        self.record_err(pos, ParamCtx::new(entries))
    }

    // ----- records -----

    fn record(&mut self) -> PResult<Record> {
        let pos = self.pos();
        self.expect(Tok::LParen)?;
        let mut entries = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let l = self.ident("a label")?;
                self.expect(Tok::Eq)?;
                entries.push((l, self.ident("a channel name")?));
                if *self.peek() != Tok::Comma {
                    break;
                }
                self.bump();
            }
        }
        self.expect(Tok::RParen)?;
        self.record_err(pos, Record::new(entries))
    }

    /// `(l = x : A, ...)`; types are mandatory.
    fn typed_record(&mut self) -> PResult<(Record, ParamCtx)> {
        let pos = self.pos();
        self.expect(Tok::LParen)?;
        let mut entries = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let l = self.ident("a label")?;
                self.expect(Tok::Eq)?;
                let x = self.ident("a channel name")?;
                self.expect(Tok::Colon)?;
                entries.push((l, x, self.ty()?));
                if *self.peek() != Tok::Comma {
                    break;
                }
                self.bump();
            }
        }
        self.expect(Tok::RParen)?;
        self.record_err(pos, split_typed_record(entries))
    }

    // ----- processes -----

    pub(crate) fn process(&mut self) -> PResult<Process> {
        let mut p = self.prefix()?;
        while *self.peek() == Tok::Lt {
            self.bump();
            let x = self.ident("a channel name")?;
            self.expect(Tok::Eq)?;
            self.expect_kw("proc")?;
            let (r, c) = self.typed_record()?;
            self.expect(Tok::FatArrow)?;
            let body = self.process()?;
            self.expect(Tok::Gt)?;
            p = Process::HOApply(Box::new(p), x, r, c, Box::new(body));
        }
        Ok(p)
    }

    fn cont(&mut self) -> PResult<Box<Process>> {
        self.expect(Tok::Dot)?;
        Ok(Box::new(self.process()?))
    }

    fn prefix(&mut self) -> PResult<Process> {
        use Process as P;
        let tok = self.peek().clone();
        match tok {
            Tok::LParen => {
                self.bump();
                let p = self.process()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            Tok::Quest => {
                self.bump();
                let x = self.ident("a channel name")?;
                self.expect(Tok::LBrack)?;
                let y = self.ident("a channel name")?;
                self.expect(Tok::RBrack)?;
                Ok(P::Client(x, y, self.cont()?))
            }
            Tok::Bang => {
                self.bump();
                let x = self.ident("a channel name")?;
                self.expect(Tok::LParen)?;
                let y = self.ident("a channel name")?;
                self.expect(Tok::RParen)?;
                Ok(P::Server(x, y, self.cont()?))
            }
            Tok::Ident(kw) if KEYWORDS.contains(&kw.as_str()) => self.keyword_form(&kw),
            Tok::Ident(_) => self.subject_form(),
            _ => self.err("a process"),
        }
    }

    fn keyword_form(&mut self, kw: &str) -> PResult<Process> {
        use Process as P;
        self.bump();
        match kw {
            "new" => {
                let x = self.ident("a channel name")?;
                self.expect(Tok::Colon)?;
                let t = self.ty()?;
                let y = self.ident("a channel name")?;
                self.expect(Tok::LBrace)?;
                let a = self.process()?;
                self.expect(Tok::Bar)?;
                let b = self.process()?;
                self.expect(Tok::RBrace)?;
                Ok(P::Cut(x, t, y, Box::new(a), Box::new(b)))
            }
            "let" => {
                let p = self.ident("a process variable")?;
                self.expect(Tok::Eq)?;
                self.expect_kw("proc")?;
                let (r, c) = self.typed_record()?;
                self.expect(Tok::FatArrow)?;
                let body = self.process()?;
                self.expect_kw("in")?;
                let scope = self.process()?;
                Ok(P::ExplSubst(Box::new(scope), p, r, c, Box::new(body)))
            }
            "def" => {
                let k = self.ident("a procedure name")?;
                let (r, c) = self.typed_record()?;
                self.expect(Tok::Eq)?;
                let body = self.process()?;
                self.expect_kw("in")?;
                let scope = self.process()?;
                Ok(P::DefProc(k, r, c, Box::new(body), Box::new(scope)))
            }
            "call" => {
                let k = self.ident("a procedure name")?;
                Ok(P::CallProc(k, self.record()?))
            }
            "close" => Ok(P::Close(self.ident("a channel name")?)),
            "wait" => {
                let x = self.ident("a channel name")?;
                Ok(P::Wait(x, self.cont()?))
            }
            "link" => {
                let x = self.ident("a channel name")?;
                let y = self.ident("a channel name")?;
                self.expect(Tok::Colon)?;
                Ok(P::Link(x, y, self.ty()?))
            }
            "run" => {
                let p = self.ident("a process variable")?;
                Ok(P::Invoke(p, self.record()?))
            }
            "mnew" => self.mcut(),
            _ => {
                self.i -= 1;
                self.err("a process")
            }
        }
    }

    fn subject_form(&mut self) -> PResult<Process> {
        use Process as P;
        let x = self.ident("a channel name")?;
        match self.bump() {
            Tok::LBrack => {
                if self.eat_kw("inl") {
                    self.expect(Tok::RBrack)?;
                    return Ok(P::SelL(x, self.cont()?));
                }
                if self.eat_kw("inr") {
                    self.expect(Tok::RBrack)?;
                    return Ok(P::SelR(x, self.cont()?));
                }
                if self.eat_kw("type") {
                    let t = self.ty()?;
                    self.expect(Tok::RBrack)?;
                    return Ok(P::SendType(x, t, self.cont()?));
                }
                if self.eat_kw("proc") {
                    let r = self.record()?;
                    self.expect(Tok::FatArrow)?;
                    let body = self.process()?;
                    self.expect(Tok::RBrack)?;
                    return Ok(P::SendProc(x, r, Box::new(body)));
                }
                match self.peek() {
                    Tok::Eq => {
                        self.bump();
                        let y = self.ident("a channel name")?;
                        self.expect(Tok::RBrack)?;
                        Ok(P::FreeSend(x, y, self.cont()?))
                    }
                    Tok::LBrack => {
                        self.bump();
                        self.expect_kw("proc")?;
                        let r = self.record()?;
                        self.expect(Tok::FatArrow)?;
                        let body = self.process()?;
                        self.expect(Tok::RBrack)?;
                        self.expect(Tok::RBrack)?;
                        Ok(P::SendProcCont(x, r, Box::new(body), self.cont()?))
                    }
                    _ => {
                        let y = self.ident("a channel name, `inl`, `inr`, `type`, `proc`, `=` or `[`")?;
                        self.expect(Tok::RBrack)?;
                        self.expect(Tok::Dot)?;
                        self.expect(Tok::LParen)?;
                        let a = self.process()?;
                        self.expect(Tok::Bar)?;
                        let b = self.process()?;
                        self.expect(Tok::RParen)?;
                        Ok(P::Send(x, y, Box::new(a), Box::new(b)))
                    }
                }
            }
            Tok::LParen => {
                if self.eat_kw("type") {
                    let v = self.ident("a type variable")?;
                    self.expect(Tok::RParen)?;
                    self.bound_tvars.push(v.clone());
                    let body = self.cont();
                    self.bound_tvars.pop();
                    return Ok(P::RecvType(x, v, body?));
                }
                if self.eat_kw("proc") {
                    let p = self.ident("a process variable")?;
                    self.expect(Tok::RParen)?;
                    return Ok(P::RecvProc(x, p, self.cont()?));
                }
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let p = self.ident("a process variable")?;
                    self.expect(Tok::RParen)?;
                    self.expect(Tok::RParen)?;
                    return Ok(P::RecvProcCont(x, p, self.cont()?));
                }
                let y = self.ident("a channel name, `type`, `proc` or `(`")?;
                self.expect(Tok::RParen)?;
                Ok(P::Recv(x, y, self.cont()?))
            }
            Tok::Dot => {
                self.expect_kw("case")?;
                self.expect(Tok::LParen)?;
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(P::EmptyOffer(x));
                }
                let a = self.process()?;
                self.expect(Tok::Comma)?;
                let b = self.process()?;
                self.expect(Tok::RParen)?;
                Ok(P::Offer(x, Box::new(a), Box::new(b)))
            }
            Tok::Backslash => {
                let p = self.ident("a process variable")?;
                Ok(P::HOParam(x, p, self.cont()?))
            }
            _ => {
                self.i -= 1;
                self.err("`[`, `(`, `.` or `\\` after a channel name")
            }
        }
    }

    fn mcut(&mut self) -> PResult<Process> {
        let gpos = self.pos();
        let global = if *self.peek() == Tok::Lt {
            self.bump();
            let g = self.global()?;
            self.expect(Tok::Gt)?;
            g
        } else {
            let name = self.ident("a global type")?;
            match self.globals.iter().find(|(n, _)| *n == name) {
                Some((_, g)) => g.clone(),
                None => return Err(ParseError::UnknownGlobal { pos: gpos, name }),
            }
        };
        self.expect(Tok::LBrace)?;
        let mut branches = Vec::new();
        loop {
            let chan = self.ident("a channel name")?;
            self.expect(Tok::Colon)?;
            let ty = self.ty()?;
            self.expect(Tok::Arrow)?;
            let body = self.process()?;
            branches.push(Branch { chan, ty, body });
            if *self.peek() != Tok::Bar {
                break;
            }
            self.bump();
        }
        self.expect(Tok::RBrace)?;
        Ok(Process::MCut(Box::new(MCut { global, branches })))
    }

    // ----- global types -----

    fn names_until(&mut self, stop: &[Tok]) -> PResult<Vec<Name>> {
        let mut out = Vec::new();
        if stop.contains(self.peek()) {
            return Ok(out);
        }
        loop {
            out.push(self.ident("an endpoint name")?);
            if *self.peek() != Tok::Comma {
                return Ok(out);
            }
            self.bump();
        }
    }

    fn braced_global(&mut self) -> PResult<Box<GlobalType>> {
        self.expect(Tok::LBrace)?;
        let g = self.global()?;
        self.expect(Tok::RBrace)?;
        Ok(Box::new(g))
    }

    fn global(&mut self) -> PResult<GlobalType> {
        use GlobalType as G;
        let pos = self.pos();
        let head = match self.peek().clone() {
            Tok::Ident(s) => s,
            _ => return self.err("a global type"),
        };
        self.bump();
        match head.as_str() {
            "out" | "close" => {
                self.expect(Tok::LParen)?;
                let xs = self.names_until(&[Tok::Semi])?;
                self.expect(Tok::Semi)?;
                let y = self.ident("an endpoint name")?;
                self.expect(Tok::RParen)?;
                if head == "close" {
                    return Ok(G::CloseWait(xs, y));
                }
                let g = self.braced_global()?;
                Ok(G::OutIn(xs, y, g, self.braced_global()?))
            }
            "sel" | "bang" | "empty" => {
                self.expect(Tok::LParen)?;
                let x = self.ident("an endpoint name")?;
                self.expect(Tok::Semi)?;
                let ys = self.names_until(&[Tok::RParen, Tok::Semi])?;
                if head == "empty" {
                    let mut extra = ChannelCtx::new();
                    if *self.peek() == Tok::Semi {
                        self.bump();
                        extra = self.channel_ctx(Tok::RParen)?;
                    }
                    self.expect(Tok::RParen)?;
                    return Ok(G::EmptyChoice(x, ys, extra));
                }
                self.expect(Tok::RParen)?;
                let g = self.braced_global()?;
                if head == "bang" {
                    return Ok(G::Bang(x, ys, g));
                }
                Ok(G::SelOffer(x, ys, g, self.braced_global()?))
            }
            "tcomm" => {
                let v = self.ident("a type variable")?;
                self.expect(Tok::LParen)?;
                let x = self.ident("an endpoint name")?;
                self.expect(Tok::Semi)?;
                let ys = self.names_until(&[Tok::RParen])?;
                self.expect(Tok::RParen)?;
                self.bound_tvars.push(v.clone());
                let g = self.braced_global();
                self.bound_tvars.pop();
                Ok(G::TypeComm(v, x, ys, g?))
            }
            "axiom" => {
                self.expect(Tok::LParen)?;
                let x = self.ident("an endpoint name")?;
                self.expect(Tok::Colon)?;
                let t = self.ty()?;
                self.expect(Tok::Semi)?;
                let y = self.ident("an endpoint name")?;
                self.expect(Tok::RParen)?;
                Ok(G::GAxiom(x, t, y))
            }
            "ho" => {
                self.expect(Tok::LParen)?;
                let x = self.ident("an endpoint name")?;
                self.expect(Tok::Semi)?;
                let y = self.ident("an endpoint name")?;
                self.expect(Tok::RParen)?;
                Ok(G::ProvideAssume(x, y, self.param_ctx_braced()?))
            }
            other => match self.globals.iter().find(|(n, _)| n == other) {
                Some((_, g)) => Ok(g.clone()),
                None => Err(ParseError::UnknownGlobal { pos, name: other.to_string() }),
            },
        }
    }
}

/// Channel contexts written as `x:A, ...`, for tests and tools.
pub fn parse_channel_ctx(src: &str) -> Result<ChannelCtx, ParseError> {
    parse_channel_ctx_with(src, ParseOptions::default())
}

pub fn parse_channel_ctx_with(src: &str, opts: ParseOptions) -> Result<ChannelCtx, ParseError> {
    let mut p = Parser::new(src, opts)?;
    let c = p.channel_ctx(Tok::Eof)?;
    p.expect(Tok::Eof)?;
    Ok(c)
}

/// Process environments written as `p:{l:A}, ...`.
pub fn parse_proc_env(src: &str) -> Result<ProcEnv, ParseError> {
    let mut p = Parser::new(src, ParseOptions::default())?;
    let mut out = BTreeMap::new();
    if *p.peek() != Tok::Eof {
        loop {
            let v = p.ident("a process variable")?;
            p.expect(Tok::Colon)?;
            out.insert(v, p.param_ctx_braced()?);
            if *p.peek() != Tok::Comma {
                break;
            }
            p.bump();
        }
    }
    p.expect(Tok::Eof)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_declaration() {
        let prog = parse("proc Main () (x:1) = close x").unwrap();
        assert_eq!(prog.decls.len(), 1);
        assert_eq!(prog.decls[0].body, Process::close("x"));
    }

    #[test]
    fn parses_process_environment() {
        let prog = parse("proc F (p:{l:1}) (x:1) = run p(l=x)").unwrap();
        let d = &prog.decls[0];
        assert_eq!(d.theta.get("p").unwrap().get("l"), Some(&Type::One));
        assert_eq!(d.body, Process::invoke("p", Record::new(vec![("l".into(), "x".into())]).unwrap()));
    }

    #[test]
    fn missing_name_is_a_syntax_error() {
        let e = parse("proc Bad () (x:1) = close").unwrap_err();
        assert!(matches!(e, ParseError::Syntax { .. }));
        assert_eq!(e.pos().col, 26);
    }

    #[test]
    fn duplicate_declarations_are_rejected() {
        let e = parse("proc A () (x:1) = close x\nproc A () (x:1) = close x").unwrap_err();
        assert!(matches!(e, ParseError::DuplicateDeclaration { .. }));
    }

    #[test]
    fn reserved_prefix_needs_opt_in() {
        assert!(matches!(parse_process("close __xp"), Err(ParseError::Reserved { .. })));
        let ok = parse_with("proc A () (__xp:1) = close __xp", ParseOptions { allow_reserved: true });
        assert!(ok.is_ok());
    }

    #[test]
    fn types_parse_with_precedence() {
        let t = parse_type("1 * bot + top").unwrap();
        assert_eq!(t, Type::plus(Type::tensor(Type::One, Type::Bot), Type::Top));
        assert_eq!(parse_type("~(1 * X)").unwrap(), Type::par(Type::Bot, Type::DualVar("X".into())));
    }

    #[test]
    fn aliases_expand_but_bound_variables_win() {
        let prog = parse("type A = 1\nproc M () (x: all A. A, y: A) = close y").unwrap();
        let d = &prog.decls[0];
        assert_eq!(d.gamma["x"], Type::forall("A", Type::var("A")));
        assert_eq!(d.gamma["y"], Type::One);
    }
}
