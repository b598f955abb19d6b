use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty logits")]
    EmptyLogits,
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("patch of size {size} does not fit in a {width}x{height} slide")]
    PatchTooLarge { size: u32, width: u32, height: u32 },
    #[error("patch at ({x}, {y}) of size {size} is out of bounds")]
    OutOfBounds { x: u32, y: u32, size: u32 },
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("bad magic")]
    BadMagic,
    #[error("version unsupported: {0}")]
    VersionUnsupported(u32),
    #[error("corrupt payload: {0}")]
    CorruptPayload(String),
    #[error("duplicate patch coordinate ({x}, {y})")]
    DuplicateCoordinate { x: u32, y: u32 },
    #[error("empty store for slide {0}")]
    EmptyStore(String),
    #[error("bag has no label")]
    MissingLabel,
    #[error("class {class} out of range for {classes} classes")]
    ClassOutOfRange { class: usize, classes: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}
