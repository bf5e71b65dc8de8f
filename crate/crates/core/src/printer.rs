//! Source renderer for syntax trees.
//!
//! Emits compilable C-subset text from any tree, including re-rooted slice
//! trees. Reparsing the output yields a tree isomorphic to the input on
//! kinds and structure, which is what the frontend round-trip invariant
//! checks. Also used to derive token counts for slices.

use crate::ast::{AstNode, AstTree, NodeKind};

pub fn print_tree(tree: &AstTree) -> String {
    let mut out = String::new();
    print_function(&tree.root, &mut out);
    out
}

fn print_function(root: &AstNode, out: &mut String) {
    let (name, ret) = root.declarator();
    let params: Vec<String> = root
        .children
        .iter()
        .filter(|c| c.kind == NodeKind::Param)
        .map(|p| {
            let (pname, pty) = p.declarator();
            format!("{} {}", pty.replace(" []", ""), pname)
                + if pty.contains("[]") { "[]" } else { "" }
        })
        .collect();
    let ret = if ret.is_empty() { "void" } else { ret };
    out.push_str(&format!("{ret} {name}({})\n", params.join(", ")));
    let body: Vec<&AstNode> = root
        .children
        .iter()
        .filter(|c| c.kind != NodeKind::Param)
        .collect();
    if body.len() == 1 && body[0].kind == NodeKind::Compound {
        print_statement(body[0], 0, out);
    } else {
        out.push_str("{\n");
        for stmt in body {
            print_statement(stmt, 1, out);
        }
        out.push_str("}\n");
    }
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn print_statement(node: &AstNode, depth: usize, out: &mut String) {
    match node.kind {
        NodeKind::Compound => {
            indent(depth.saturating_sub(1), out);
            out.push_str("{\n");
            for child in &node.children {
                print_statement(child, depth + 1, out);
            }
            indent(depth.saturating_sub(1), out);
            out.push_str("}\n");
        }
        NodeKind::Decl => {
            indent(depth, out);
            let (name, ty) = node.declarator();
            let (ndims, _) = node.decl_shape();
            out.push_str(&format!("{} {}", ty.replace(" []", ""), name));
            for dim in &node.children[..ndims] {
                out.push('[');
                out.push_str(&print_expr(dim));
                out.push(']');
            }
            if ty.contains("[]") {
                out.push_str("[]");
            }
            if let Some(init) = node.decl_init() {
                out.push_str(" = ");
                out.push_str(&print_expr(init));
            }
            out.push_str(";\n");
        }
        NodeKind::For => {
            indent(depth, out);
            let (inits, cond, incrs, body) = node.for_parts();
            let inits: Vec<String> = inits.iter().map(print_expr).collect();
            let incrs: Vec<String> = incrs.iter().map(print_expr).collect();
            out.push_str(&format!(
                "for ({}; {}; {})",
                inits.join(", "),
                cond.map(print_expr).unwrap_or_default(),
                incrs.join(", ")
            ));
            print_substatement(body, depth, out);
        }
        NodeKind::While => {
            indent(depth, out);
            out.push_str(&format!("while ({})", print_expr(&node.children[0])));
            print_substatement(&node.children[1], depth, out);
        }
        NodeKind::If => {
            indent(depth, out);
            out.push_str(&format!("if ({})", print_expr(&node.children[0])));
            print_substatement(&node.children[1], depth, out);
            if let Some(els) = node.children.get(2) {
                indent(depth, out);
                out.push_str("else");
                print_substatement(els, depth, out);
            }
        }
        NodeKind::Return => {
            indent(depth, out);
            match node.children.first() {
                Some(e) => out.push_str(&format!("return {};\n", print_expr(e))),
                None => out.push_str("return;\n"),
            }
        }
        _ => {
            indent(depth, out);
            out.push_str(&print_expr(node));
            out.push_str(";\n");
        }
    }
}

fn print_substatement(body: &AstNode, depth: usize, out: &mut String) {
    if body.kind == NodeKind::Compound {
        out.push(' ');
        print_statement(body, depth + 1, out);
    } else {
        out.push('\n');
        print_statement(body, depth + 1, out);
    }
}

pub fn print_expr(node: &AstNode) -> String {
    match node.kind {
        NodeKind::Id | NodeKind::Constant => node.text.clone(),
        NodeKind::ArrayRef => format!(
            "{}[{}]",
            print_operand(&node.children[0]),
            print_expr(&node.children[1])
        ),
        NodeKind::Assignment => format!(
            "{} = {}",
            print_expr(&node.children[0]),
            print_expr(&node.children[1])
        ),
        NodeKind::StructRef => format!(
            "{}{}{}",
            print_operand(&node.children[0]),
            node.text,
            node.children[1].text
        ),
        NodeKind::BinaryOp => format!(
            "{} {} {}",
            print_operand(&node.children[0]),
            node.text,
            print_operand(&node.children[1])
        ),
        NodeKind::UnaryOp => {
            let inner = print_operand(&node.children[0]);
            match node.text.as_str() {
                "p++" => format!("{inner}++"),
                "p--" => format!("{inner}--"),
                op => format!("{op}{inner}"),
            }
        }
        NodeKind::Deref => format!("*{}", print_operand(&node.children[0])),
        NodeKind::Call => {
            let args: Vec<String> = node.children[1..].iter().map(print_expr).collect();
            format!("{}({})", print_operand(&node.children[0]), args.join(", "))
        }
        _ => String::new(),
    }
}

/// Like [`print_expr`] but parenthesizes compound operands so precedence
/// survives reparsing.
fn print_operand(node: &AstNode) -> String {
    match node.kind {
        NodeKind::BinaryOp | NodeKind::Assignment => format!("({})", print_expr(node)),
        _ => print_expr(node),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_translation_unit;

    fn round_trip(src: &str) {
        let trees = parse_translation_unit(src, "t.c").unwrap();
        for tree in &trees {
            let printed = print_tree(tree);
            let reparsed = parse_translation_unit(&printed, "rt.c")
                .unwrap_or_else(|e| panic!("reparse failed: {e}\n{printed}"));
            assert_eq!(reparsed.len(), 1, "printed:\n{printed}");
            assert!(
                tree.root.isomorphic(&reparsed[0].root),
                "round trip not isomorphic:\n{printed}"
            );
        }
    }

    #[test]
    fn round_trip_statements() {
        round_trip("void f(int *p, int n){ int i; for (i = 0; i < n; i++) { p[i] = i; } }");
        round_trip("int g(int *p){ if (p[0] > 1) return 1; else return 0; }");
        round_trip("void h(int *p){ int j; while (p[j] >= 0) j++; }");
        round_trip("void k(s_t *gs){ int c; c = gs->code[c][c]; *(gs->base + c) = 0; }");
        round_trip("void m(int *p){ p[0] += 2 * (1 + p[1]); foo(p, &p[2]); }");
    }

    #[test]
    fn precedence_survives_printing() {
        let src = "void f(void){ x = (a + b) * c; }";
        let trees = parse_translation_unit(src, "t.c").unwrap();
        let printed = print_tree(&trees[0]);
        let reparsed = parse_translation_unit(&printed, "rt.c").unwrap();
        assert!(trees[0].root.isomorphic(&reparsed[0].root));
    }
}
