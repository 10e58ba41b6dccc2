use std::collections::HashMap;
use std::fmt::Write as _;

use crate::attributes::WindowAttributes;
use crate::graph::ReviewNetwork;
use crate::identity::PersonId;

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            // characters XML 1.0 cannot carry at all
            '\u{0}'..='\u{8}' | '\u{B}' | '\u{C}' | '\u{E}'..='\u{1F}' | '\u{FFFE}' | '\u{FFFF}' => {
                out.push('\u{FFFD}')
            }
            c => out.push(c),
        }
    }
    out
}

const KEYS: [(&str, &str, &str, &str); 8] = [
    ("canonical_name", "node", "canonical_name", "string"),
    ("is_maintainer", "node", "is_maintainer", "boolean"),
    ("affiliation", "node", "affiliation", "string"),
    ("signed_commits", "node", "signed_commits", "long"),
    ("weight", "edge", "weight", "long"),
    ("signed", "edge", "signed", "long"),
    ("acked", "edge", "acked", "long"),
    ("reviewed", "edge", "reviewed", "long"),
];

/// Directed GraphML document of the diagonal-stripped network. Nodes are
/// ordered by person id; self-sign-off counts travel as a node attribute.
pub fn emit_graphml(net: &ReviewNetwork, attrs: &WindowAttributes, names: &HashMap<PersonId, &str>) -> String {
    let mut doc = String::new();
    doc.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    doc.push_str(
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" \
         xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" \
         xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns \
         http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n",
    );
    for (id, domain, name, ty) in KEYS {
        let _ = writeln!(
            doc,
            "  <key id=\"{id}\" for=\"{domain}\" attr.name=\"{name}\" attr.type=\"{ty}\"/>"
        );
    }
    let graph_id = escape(&format!("{}/{}", net.subsystem, net.window));
    let _ = writeln!(doc, "  <graph id=\"{graph_id}\" edgedefault=\"directed\">");

    let diagonal = net.diagonal();
    for (idx, &person) in net.nodes().iter().enumerate() {
        let name = names.get(&person).copied().unwrap_or("");
        let _ = writeln!(doc, "    <node id=\"n{person}\">");
        let _ = writeln!(doc, "      <data key=\"canonical_name\">{}</data>", escape(name));
        let _ = writeln!(doc, "      <data key=\"is_maintainer\">{}</data>", attrs.is_maintainer(person));
        let _ = writeln!(
            doc,
            "      <data key=\"affiliation\">{}</data>",
            escape(&attrs.affiliation(person).to_string())
        );
        let _ = writeln!(doc, "      <data key=\"signed_commits\">{}</data>", diagonal[idx]);
        doc.push_str("    </node>\n");
    }

    for (edge_no, (reviewer, author, counts)) in net.edges().filter(|(r, a, _)| r != a).enumerate() {
        let _ = writeln!(
            doc,
            "    <edge id=\"e{edge_no}\" source=\"n{reviewer}\" target=\"n{author}\">"
        );
        let _ = writeln!(doc, "      <data key=\"weight\">{}</data>", counts.weight());
        let _ = writeln!(doc, "      <data key=\"signed\">{}</data>", counts.signed);
        let _ = writeln!(doc, "      <data key=\"acked\">{}</data>", counts.acked);
        let _ = writeln!(doc, "      <data key=\"reviewed\">{}</data>", counts.reviewed);
        doc.push_str("    </edge>\n");
    }
    doc.push_str("  </graph>\n</graphml>\n");
    doc
}
