//! Element skeletons of XML documents.

use quick_xml::events::Event;
use quick_xml::Reader;

use crate::error::{Error, Result};
use crate::tree::{Label, Tree};

#[derive(Clone, Copy, Debug, Default)]
pub struct XmlOptions {
    /// Reject attributes and text instead of skipping them.
    pub strict: bool,
}

/// Reads the element skeleton of a document, skipping everything else.
pub fn read_xml(text: &str) -> Result<Tree> {
    read_xml_with(text, XmlOptions::default()).map(|(t, _)| t)
}

/// Reads the element skeleton. Skipped attributes and non-blank text are
/// reported as warnings, or as errors in strict mode. Comments, processing
/// instructions and the declaration are skipped silently.
pub fn read_xml_with(text: &str, options: XmlOptions) -> Result<(Tree, Vec<String>)> {
    let mut reader = Reader::from_str(text);
    let mut warnings = Vec::new();
    let mut stack: Vec<Tree> = Vec::new();
    let mut root: Option<Tree> = None;
    loop {
        let position = reader.buffer_position();
        let event = reader.read_event().map_err(|e| Error::Xml {
            position: reader.error_position(),
            message: e.to_string(),
        })?;
        let mut skipped = |what: String| -> Result<()> {
            if options.strict {
                Err(Error::Strict(format!("byte {position}: {what}")))
            } else {
                warnings.push(format!("byte {position}: skipped {what}"));
                Ok(())
            }
        };
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let name = e.name().into_inner().to_string();
                let label = Label::new(&name).map_err(|_| Error::Xml {
                    position,
                    message: format!("element name `{name}` is not a valid label"),
                })?;
                for attr in e.attributes() {
                    let attr = attr.map_err(|err| Error::Xml {
                        position,
                        message: err.to_string(),
                    })?;
                    let key = attr.key.into_inner().to_string();
                    skipped(format!("attribute `{key}` on <{name}>"))?;
                }
                if root.is_some() && stack.is_empty() {
                    return Err(Error::Xml {
                        position,
                        message: "more than one root element".into(),
                    });
                }
                let node = Tree::leaf(label);
                if matches!(event, Event::Start(_)) {
                    stack.push(node);
                } else {
                    close(&mut stack, &mut root, node);
                }
            }
            Event::End(_) => {
                let node = stack.pop().expect("reader checks that end tags match");
                close(&mut stack, &mut root, node);
            }
            Event::Text(ref t) => {
                let content: &str = t.as_ref();
                if !content.trim().is_empty() {
                    skipped("text content".into())?;
                }
            }
            Event::CData(_) => skipped("CDATA section".into())?,
            Event::GeneralRef(_) => skipped("entity reference".into())?,
            Event::Comment(_) | Event::Decl(_) | Event::PI(_) | Event::DocType(_) => {}
            Event::Eof => break,
        }
    }
    if !stack.is_empty() {
        return Err(Error::Xml {
            position: reader.buffer_position(),
            message: "unclosed element".into(),
        });
    }
    root.map(|t| (t, warnings)).ok_or(Error::Xml {
        position: 0,
        message: "no root element".into(),
    })
}

fn close(stack: &mut [Tree], root: &mut Option<Tree>, node: Tree) {
    match stack.last_mut() {
        Some(parent) => parent.children_mut().push(node),
        None => *root = Some(node),
    }
}

/// Writes a tree as nested elements, one per line, indented by depth.
pub fn write_xml(t: &Tree) -> String {
    let mut out = String::new();
    write_node(t, 0, &mut out);
    out
}

fn write_node(t: &Tree, depth: usize, out: &mut String) {
    let indent = "  ".repeat(depth);
    if t.children().is_empty() {
        out.push_str(&format!("{indent}<{}/>\n", t.label()));
        return;
    }
    out.push_str(&format!("{indent}<{}>\n", t.label()));
    for c in t.children() {
        write_node(c, depth + 1, out);
    }
    out.push_str(&format!("{indent}</{}>\n", t.label()));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skeleton() {
        assert_eq!(read_xml("<a><b/><c/></a>").unwrap().to_string(), "a(b,c)");
    }

    #[test]
    fn lenient_skips_with_warnings() {
        let (t, w) = read_xml_with("<?xml version=\"1.0\"?><a x=\"1\"><b>hi</b><!-- c --></a>", XmlOptions::default()).unwrap();
        assert_eq!(t.to_string(), "a(b)");
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn strict_rejects_attributes() {
        assert!(read_xml_with("<a x=\"1\"/>", XmlOptions { strict: true }).is_err());
    }

    #[test]
    fn malformed() {
        assert!(read_xml("<a><b></a>").is_err());
        assert!(read_xml("<a/><b/>").is_err());
        assert!(read_xml("").is_err());
    }

    #[test]
    fn write_then_read() {
        let t = Tree::parse("a(b(c,d),e)").unwrap();
        assert_eq!(read_xml(&write_xml(&t)).unwrap(), t);
    }
}
