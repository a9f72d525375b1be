//! Canonical pretty-printer. One statement per line, four-space indent,
//! single spaces around infix operators, braces always present.

use std::fmt::Write;

use super::ast::{NodeKind, Operator, Program, Tree};

const INDENT: &str = "    ";

pub fn render(p: &Program) -> String {
    let mut out = String::new();
    for (i, f) in p.to_trees().iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        render_function(f, &mut out);
    }
    out
}

/// Renders any subtree on a single line (used for mutation logs).
pub fn render_inline(t: &Tree) -> String {
    match t.kind.category() {
        super::ast::Category::Expression => expr(t),
        super::ast::Category::Operator => match t.kind {
            NodeKind::Operator(op) => op.to_string(),
            _ => unreachable!(),
        },
        super::ast::Category::Statement => {
            let mut out = String::new();
            statement(t, 0, &mut out);
            out.lines().map(str::trim).collect::<Vec<_>>().join(" ")
        }
        super::ast::Category::Declaration => {
            let mut out = String::new();
            render_function(t, &mut out);
            out.lines().map(str::trim).collect::<Vec<_>>().join(" ")
        }
    }
}

fn render_function(f: &Tree, out: &mut String) {
    let NodeKind::FunctionDecl { name, ret, params } = &f.kind else {
        statement(f, 0, out);
        return;
    };
    let params: Vec<String> = params.iter().map(|p| format!("{} {}", p.ty, p.name)).collect();
    let _ = write!(out, "{ret} {name}({})", params.join(", "));
    match f.children.first() {
        Some(body) if body.kind == NodeKind::Block => {
            out.push_str(" {\n");
            for s in &body.children {
                statement(s, 1, out);
            }
            out.push_str("}\n");
        }
        Some(other) => {
            // Not valid MiniLang, but still printable for diagnostics.
            out.push('\n');
            statement(other, 1, out);
        }
        None => out.push_str(" {\n}\n"),
    }
}

fn line(depth: usize, out: &mut String, text: &str) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
    out.push_str(text);
    out.push('\n');
}

fn body(stmts: &[Tree], depth: usize, out: &mut String) {
    for s in stmts {
        statement(s, depth, out);
    }
}

fn statement(s: &Tree, depth: usize, out: &mut String) {
    let c = &s.children;
    match &s.kind {
        NodeKind::Block => {
            line(depth, out, "{");
            body(c, depth + 1, out);
            line(depth, out, "}");
        }
        NodeKind::VarDecl { name, ty } => {
            line(depth, out, &format!("{ty} {name} = {};", expr(&c[0])));
        }
        NodeKind::Assign => line(depth, out, &format!("{} = {};", expr(&c[0]), expr(&c[1]))),
        NodeKind::If { then_len, has_else } => {
            line(depth, out, &format!("if ({}) {{", expr(&c[0])));
            let split = (1 + then_len).min(c.len());
            body(&c[1..split], depth + 1, out);
            if *has_else {
                line(depth, out, "} else {");
                body(&c[split..], depth + 1, out);
            }
            line(depth, out, "}");
        }
        NodeKind::For { var } => {
            line(depth, out, &format!("for (int {var} = {}; {}; {}) {{", expr(&c[0]), expr(&c[1]), expr(&c[2])));
            body(&c[3..], depth + 1, out);
            line(depth, out, "}");
        }
        NodeKind::While => {
            line(depth, out, &format!("while ({}) {{", expr(&c[0])));
            body(&c[1..], depth + 1, out);
            line(depth, out, "}");
        }
        NodeKind::Return => match c.first() {
            Some(v) => line(depth, out, &format!("return {};", expr(v))),
            None => line(depth, out, "return;"),
        },
        NodeKind::ExprStmt => line(depth, out, &format!("{};", expr(&c[0]))),
        _ => line(depth, out, &format!("{};", expr(s))),
    }
}

fn op_symbol(t: &Tree) -> String {
    match t.kind {
        NodeKind::Operator(op) => op.symbol().to_string(),
        _ => format!("<{}>", t.kind.name()),
    }
}

fn binary_precedence(t: &Tree) -> Option<u8> {
    if t.kind != NodeKind::Binary {
        return None;
    }
    match t.children.get(1).map(|o| &o.kind) {
        Some(NodeKind::Operator(Operator::Binary(op))) => Some(op.precedence()),
        _ => Some(0),
    }
}

/// Operand of a postfix or prefix operator.
fn tight(t: &Tree) -> String {
    match t.kind {
        NodeKind::Binary | NodeKind::Unary => format!("({})", expr(t)),
        _ => expr(t),
    }
}

fn expr(t: &Tree) -> String {
    let c = &t.children;
    match &t.kind {
        NodeKind::IntLiteral(v) if *v < 0 => format!("({v})"),
        NodeKind::IntLiteral(v) => v.to_string(),
        NodeKind::BoolLiteral(b) => b.to_string(),
        NodeKind::Identifier { name } => name.clone(),
        NodeKind::Call { name } => {
            let args: Vec<String> = c.iter().map(expr).collect();
            format!("{name}({})", args.join(", "))
        }
        NodeKind::Index => format!("{}[{}]", tight(&c[0]), expr(&c[1])),
        NodeKind::IncDec => format!("{}{}", tight(&c[0]), op_symbol(&c[1])),
        NodeKind::Unary => {
            let operand = match c[1].kind {
                NodeKind::Binary | NodeKind::Unary => format!("({})", expr(&c[1])),
                NodeKind::IntLiteral(v) if v < 0 => format!("({})", expr(&c[1])),
                _ => expr(&c[1]),
            };
            format!("{}{}", op_symbol(&c[0]), operand)
        }
        NodeKind::Binary => {
            let prec = binary_precedence(t).unwrap_or(0);
            let lhs = match binary_precedence(&c[0]) {
                Some(p) if p < prec => format!("({})", expr(&c[0])),
                _ => expr(&c[0]),
            };
            let rhs = match binary_precedence(&c[2]) {
                Some(p) if p <= prec => format!("({})", expr(&c[2])),
                _ => expr(&c[2]),
            };
            format!("{lhs} {} {rhs}", op_symbol(&c[1]))
        }
        NodeKind::Operator(op) => op.symbol().to_string(),
        other => format!("<{}>", other.name()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::parse;

    #[test]
    fn empty_function_canonical_form() {
        assert_eq!(render(&parse("void f(){}").unwrap()), "void f() {\n}\n");
    }

    #[test]
    fn keeps_needed_parentheses() {
        let src = "int f(int a, int b) {\n    return (a - (b - 1)) * -(a + b);\n}\n";
        let p = parse(src).unwrap();
        assert_eq!(render(&p), "int f(int a, int b) {\n    return (a - (b - 1)) * -(a + b);\n}\n");
        assert_eq!(parse(&render(&p)).unwrap(), p);
    }

    #[test]
    fn drops_redundant_parentheses() {
        let p = parse("int f(int a) { return ((a) + (1 * 2)); }").unwrap();
        assert_eq!(render(&p), "int f(int a) {\n    return a + 1 * 2;\n}\n");
    }

    #[test]
    fn if_else_and_loops() {
        let src = "void f(int[] a, int n) {\n    for (int i = 0; i < n; i++) {\n        if (a[i] > 0) {\n            a[i]--;\n        } else {\n            while (a[i] < 0) {\n                a[i] = a[i] + 1;\n            }\n        }\n    }\n}\n";
        let p = parse(src).unwrap();
        assert_eq!(render(&p), src);
    }

    #[test]
    fn inline_statement() {
        let p = parse("void f(int x) { if (x > 0) { x = 0; } }").unwrap();
        let stmt = p.subtree(p.children(crate::minilang::NodeId(1))[0]);
        assert_eq!(render_inline(&stmt), "if (x > 0) { x = 0; }");
    }
}
