use std::fmt::Write;

use super::{Decl, Program};
use crate::ast::{ChannelCtx, GlobalType, ParamCtx, Process, Record, Type};

pub fn print_type(a: &Type) -> String {
    let mut s = String::new();
    ty(a, 0, &mut s);
    s
}

/// `level` is 0 in sum position, 1 in product position, 2 under a prefix operator.
fn ty(a: &Type, level: u8, out: &mut String) {
    let paren = |need: bool, out: &mut String, f: &dyn Fn(&mut String)| {
        if need {
            out.push('(');
            f(out);
            out.push(')');
        } else {
            f(out);
        }
    };
    match a {
        Type::Var(x) => out.push_str(x),
        Type::DualVar(x) => {
            out.push('~');
            out.push_str(x)
        }
        Type::Zero => out.push('0'),
        Type::One => out.push('1'),
        Type::Top => out.push_str("top"),
        Type::Bot => out.push_str("bot"),
        Type::Plus(l, r) | Type::With(l, r) => {
            let op = if matches!(a, Type::Plus(..)) { " + " } else { " & " };
            paren(level > 0, out, &|out| {
                ty(l, 1, out);
                out.push_str(op);
                ty(r, 0, out);
            })
        }
        Type::Tensor(l, r) | Type::Par(l, r) => {
            let op = if matches!(a, Type::Tensor(..)) { " * " } else { " @ " };
            paren(level > 1, out, &|out| {
                ty(l, 2, out);
                out.push_str(op);
                ty(r, 1, out);
            })
        }
        Type::WhyNot(b) => {
            out.push('?');
            ty(b, 2, out)
        }
        Type::OfCourse(b) => {
            out.push('!');
            ty(b, 2, out)
        }
        Type::Exists(x, b) | Type::Forall(x, b) => {
            let q = if matches!(a, Type::Exists(..)) { "ex" } else { "all" };
            // The body extends as far right as possible, so any operand position needs parentheses.
            paren(level > 0, out, &|out| {
                let _ = write!(out, "{q} {x}. ");
                ty(b, 0, out);
            })
        }
        Type::Provide(c) | Type::Assume(c) => {
            out.push_str(if matches!(a, Type::Provide(..)) { "provide" } else { "assume" });
            param_ctx(c, out)
        }
    }
}

fn param_ctx(c: &ParamCtx, out: &mut String) {
    out.push('{');
    for (i, (l, t)) in c.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{l}:");
        ty(t, 0, out);
    }
    out.push('}');
}

fn record(r: &Record, out: &mut String) {
    out.push('(');
    for (i, (l, x)) in r.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{l}={x}");
    }
    out.push(')');
}

fn typed_record(r: &Record, c: &ParamCtx, out: &mut String) {
    out.push('(');
    for (i, (l, x)) in r.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{l}={x} : ");
        match c.get(l) {
            Some(t) => ty(t, 0, out),
            None => out.push('?'),
        }
    }
    out.push(')');
}

fn channel_ctx(g: &ChannelCtx, out: &mut String) {
    for (i, (x, t)) in g.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{x}:");
        ty(t, 0, out);
    }
}

pub fn print_process(p: &Process) -> String {
    let mut s = String::new();
    proc(p, &mut s);
    s
}

fn proc(p: &Process, out: &mut String) {
    use Process::*;
    match p {
        Send(x, y, a, b) => {
            let _ = write!(out, "{x}[{y}].(");
            proc(a, out);
            out.push_str(" | ");
            proc(b, out);
            out.push(')');
        }
        Recv(x, y, a) => prefixed(out, &format!("{x}({y})"), a),
        SelL(x, a) => prefixed(out, &format!("{x}[inl]"), a),
        SelR(x, a) => prefixed(out, &format!("{x}[inr]"), a),
        Offer(x, a, b) => {
            let _ = write!(out, "{x}.case(");
            proc(a, out);
            out.push_str(", ");
            proc(b, out);
            out.push(')');
        }
        EmptyOffer(x) => {
            let _ = write!(out, "{x}.case()");
        }
        Client(x, y, a) => prefixed(out, &format!("?{x}[{y}]"), a),
        Server(x, y, a) => prefixed(out, &format!("!{x}({y})"), a),
        SendType(x, t, a) => prefixed(out, &format!("{x}[type {}]", print_type(t)), a),
        RecvType(x, v, a) => prefixed(out, &format!("{x}(type {v})"), a),
        SendProc(x, r, a) => {
            let _ = write!(out, "{x}[proc");
            record(r, out);
            out.push_str(" => ");
            proc(a, out);
            out.push(']');
        }
        RecvProc(x, q, a) => prefixed(out, &format!("{x}(proc {q})"), a),
        Invoke(q, r) => {
            let _ = write!(out, "run {q}");
            record(r, out);
        }
        Close(x) => {
            let _ = write!(out, "close {x}");
        }
        Wait(x, a) => prefixed(out, &format!("wait {x}"), a),
        Link(x, y, t) => {
            let _ = write!(out, "link {x} {y} : ");
            ty(t, 0, out);
        }
        Cut(x, t, y, a, b) => {
            let _ = write!(out, "new {x}:");
            ty(t, 0, out);
            let _ = write!(out, " {y} {{ ");
            proc(a, out);
            out.push_str(" | ");
            proc(b, out);
            out.push_str(" }");
        }
        ExplSubst(scope, q, r, c, body) => {
            let _ = write!(out, "let {q} = proc");
            typed_record(r, c, out);
            out.push_str(" => ");
            proc(body, out);
            out.push_str(" in ");
            proc(scope, out);
        }
        MCut(m) => {
            out.push_str("mnew <");
            global(&m.global, out);
            out.push_str("> { ");
            for (i, b) in m.branches.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                let _ = write!(out, "{}:", b.chan);
                ty(&b.ty, 0, out);
                out.push_str(" -> ");
                proc(&b.body, out);
            }
            out.push_str(" }");
        }
        FreeSend(x, y, a) => prefixed(out, &format!("{x}[={y}]"), a),
        SendProcCont(x, r, a, b) => {
            let _ = write!(out, "{x}[[proc");
            record(r, out);
            out.push_str(" => ");
            proc(a, out);
            out.push_str("]]. ");
            proc(b, out);
        }
        RecvProcCont(x, q, a) => prefixed(out, &format!("{x}(({q}))"), a),
        DefProc(k, r, c, body, scope) => {
            let _ = write!(out, "def {k}");
            typed_record(r, c, out);
            out.push_str(" = ");
            proc(body, out);
            out.push_str(" in ");
            proc(scope, out);
        }
        CallProc(k, r) => {
            let _ = write!(out, "call {k}");
            record(r, out);
        }
        HOParam(x, q, a) => prefixed(out, &format!("{x}\\{q}"), a),
        HOApply(scope, x, r, c, body) => {
            out.push('(');
            proc(scope, out);
            let _ = write!(out, ") <{x} = proc");
            typed_record(r, c, out);
            out.push_str(" => ");
            proc(body, out);
            out.push('>');
        }
    }
}

fn prefixed(out: &mut String, head: &str, cont: &Process) {
    out.push_str(head);
    out.push_str(". ");
    proc(cont, out);
}

pub fn print_global(g: &GlobalType) -> String {
    let mut s = String::new();
    global(g, &mut s);
    s
}

fn global(g: &GlobalType, out: &mut String) {
    use GlobalType::*;
    let braced = |g: &GlobalType, out: &mut String| {
        out.push('{');
        global(g, out);
        out.push('}');
    };
    match g {
        OutIn(xs, y, g1, g2) => {
            let _ = write!(out, "out({}; {y})", xs.join(", "));
            braced(g1, out);
            braced(g2, out);
        }
        CloseWait(xs, y) => {
            let _ = write!(out, "close({}; {y})", xs.join(", "));
        }
        SelOffer(x, ys, g1, g2) => {
            let _ = write!(out, "sel({x}; {})", ys.join(", "));
            braced(g1, out);
            braced(g2, out);
        }
        EmptyChoice(x, ys, ctx) => {
            let _ = write!(out, "empty({x}; {}", ys.join(", "));
            if !ctx.is_empty() {
                out.push_str("; ");
                channel_ctx(ctx, out);
            }
            out.push(')');
        }
        Bang(x, ys, g1) => {
            let _ = write!(out, "bang({x}; {})", ys.join(", "));
            braced(g1, out);
        }
        TypeComm(v, x, ys, g1) => {
            let _ = write!(out, "tcomm {v} ({x}; {})", ys.join(", "));
            braced(g1, out);
        }
        GAxiom(x, t, y) => {
            let _ = write!(out, "axiom({x} : ");
            ty(t, 0, out);
            let _ = write!(out, "; {y})");
        }
        ProvideAssume(x, y, c) => {
            let _ = write!(out, "ho({x}; {y})");
            param_ctx(c, out);
        }
    }
}

pub fn print_decl(d: &Decl) -> String {
    let mut out = format!("proc {} (", d.name);
    for (i, (q, c)) in d.theta.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{q}:");
        param_ctx(c, &mut out);
    }
    out.push_str(") (");
    channel_ctx(&d.gamma, &mut out);
    out.push_str(") =\n  ");
    proc(&d.body, &mut out);
    out.push('\n');
    out
}

/// Aliases are expanded at parse time, so they are printed for reference only.
pub fn print_program(prog: &Program) -> String {
    let mut out = String::new();
    for (n, t) in &prog.aliases {
        let _ = writeln!(out, "type {n} = {}", print_type(t));
    }
    for (n, g) in &prog.globals {
        let _ = writeln!(out, "gtype {n} = <{}>", print_global(g));
    }
    if !prog.aliases.is_empty() || !prog.globals.is_empty() {
        out.push('\n');
    }
    for (i, d) in prog.decls.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&print_decl(d));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parser::{parse_process, parse_type};

    #[test]
    fn fixed_surface_forms() {
        assert_eq!(print_process(&Process::close("x")), "close x");
        let cut = Process::cut("x", Type::One, "y", Process::close("x"), Process::wait("y", Process::close("z")));
        assert_eq!(print_process(&cut), "new x:1 y { close x | wait y. close z }");
        let r = Record::new(vec![("l".into(), "a".into())]).unwrap();
        assert_eq!(print_process(&Process::send_proc("x", r, Process::close("a"))), "x[proc(l=a) => close a]");
    }

    #[test]
    fn types_round_trip() {
        for src in [
            "1 * bot + top",
            "(1 + 1) * bot",
            "(ex X. X) * 1",
            "!(all X. X @ ~X)",
            "provide{a:1, b:?bot} @ assume{}",
            "(A & B) + C",
            "A * (B * C)",
        ] {
            let t = parse_type(src).unwrap();
            assert_eq!(parse_type(&print_type(&t)).unwrap(), t, "{src}");
        }
    }

    #[test]
    fn sugar_round_trips() {
        for src in [
            "x[=y]. close x",
            "x[[proc(l=a) => close a]]. close x",
            "x((p)). run p(l=x)",
            "def K(l=a : 1) = close a in call K(l=l)",
            "x\\p. run p()",
            "(close z) <x = proc(l=a : 1) => close a>",
            "let p = proc(l=a : 1) => close a in run p(l=z)",
        ] {
            let p = parse_process(src).unwrap();
            assert_eq!(parse_process(&print_process(&p)).unwrap(), p, "{src}");
        }
    }
}
