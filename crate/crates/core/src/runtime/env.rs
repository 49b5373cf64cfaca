use super::interface::{ChannelDecl, InterfaceSpec, SpecError};
use super::memory::CommonMemory;
use crate::ident::Endpoint;

/// Stand-in for one neighbor task of the TUT.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stub {
    pub endpoint: Endpoint,
    /// Messages this stub may inject into the TUT.
    pub injects: Vec<ChannelDecl>,
    /// Messages from the TUT this stub receives and records.
    pub receives: Vec<ChannelDecl>,
}

/// The generated task environment around the TUT: exactly one stub per
/// adjacent endpoint, Common Memory included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Environment {
    spec: InterfaceSpec,
    stubs: Vec<Stub>,
}

impl Environment {
    pub fn spec(&self) -> &InterfaceSpec {
        &self.spec
    }

    pub fn stubs(&self) -> &[Stub] {
        &self.stubs
    }

    pub fn stub(&self, endpoint: &Endpoint) -> Option<&Stub> {
        self.stubs.iter().find(|s| &s.endpoint == endpoint)
    }

    /// Empty Common Memory with the interface's slots declared.
    pub fn fresh_memory(&self) -> CommonMemory {
        CommonMemory::new(&self.spec.effective_cm_slots())
    }
}

pub fn generate_environment(spec: &InterfaceSpec) -> Result<Environment, SpecError> {
    spec.validate()?;
    let mut stubs: Vec<Stub> = Vec::new();
    fn stub_for<'a>(stubs: &'a mut Vec<Stub>, endpoint: &Endpoint) -> &'a mut Stub {
        let pos = match stubs.iter().position(|s| &s.endpoint == endpoint) {
            Some(p) => p,
            None => {
                stubs.push(Stub {
                    endpoint: endpoint.clone(),
                    injects: vec![],
                    receives: vec![],
                });
                stubs.len() - 1
            }
        };
        &mut stubs[pos]
    }
    for d in &spec.inbound {
        stub_for(&mut stubs, &d.endpoint).injects.push(d.clone());
    }
    for d in spec.outbound_channels() {
        stub_for(&mut stubs, &d.endpoint).receives.push(d);
    }
    Ok(Environment {
        spec: spec.clone(),
        stubs,
    })
}
