pub mod batch;
pub mod dot;
pub mod engine;
pub mod lang;
pub mod law;
pub mod net;
pub mod oracle;
pub mod program;
pub mod session;
pub mod system;
pub mod translate;
