use crate::judge::{JudgeClient, JudgeError, RequestContext};
use crate::pairwise::prompt::{
    build_keyed_compare_prompt, build_keyed_resolve_prompt, build_pair_prompt, parse_keyed_answer,
    parse_keyed_verdict, parse_pair_response, KEYED_TEMPLATE_VERSION, PAIR_TEMPLATE_VERSION,
};
use crate::pairwise::{KeyedVerdict, PairItem, PairJudge, PairOrder, Presented};
use std::sync::Arc;

/// Pairwise judging through a cache-first [`JudgeClient`].
pub struct PairGateway {
    client: Arc<JudgeClient>,
}

impl PairGateway {
    pub fn new(client: Arc<JudgeClient>) -> Self {
        Self { client }
    }

    pub fn client(&self) -> &JudgeClient {
        &self.client
    }
}

impl PairJudge for PairGateway {
    fn compare(&self, item: &PairItem, order: PairOrder) -> Result<Presented, JudgeError> {
        let prompt = build_pair_prompt(item, order);
        self.client.call_parsed(
            &prompt,
            RequestContext::PairCompare { item, order },
            PAIR_TEMPLATE_VERSION,
            parse_pair_response,
        )
    }

    fn keyed(&self, item: &PairItem) -> Result<KeyedVerdict, JudgeError> {
        let resolve = build_keyed_resolve_prompt(item);
        let resolved_answer = self.client.call_parsed(
            &resolve,
            RequestContext::KeyedResolve { item },
            KEYED_TEMPLATE_VERSION,
            parse_keyed_answer,
        )?;
        let compare = build_keyed_compare_prompt(item, &resolved_answer);
        let winner = self.client.call_parsed(
            &compare,
            RequestContext::KeyedCompare {
                item,
                resolved_answer: &resolved_answer,
            },
            KEYED_TEMPLATE_VERSION,
            parse_keyed_verdict,
        )?;
        Ok(KeyedVerdict {
            winner,
            resolved_answer,
        })
    }
}
