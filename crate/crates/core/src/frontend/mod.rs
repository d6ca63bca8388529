//! Parsers and printers for schemas, automata, update scripts and XML.

pub mod dtd;
pub mod ha_format;
mod lex;
pub mod updates;
pub mod xml;

pub use dtd::{compile_dtd, parse_dtd, parse_dtd_with, ContentModel, DtdOptions, DtdSchema};
pub use ha_format::{parse_ha, parse_ha_with_warnings, print_ha};
pub use updates::parse_updates;
pub use xml::{read_xml, read_xml_with, write_xml, XmlOptions};
