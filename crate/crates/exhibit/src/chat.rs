//! Fine-tuning dataset export and the chat-completion client for the
//! fine-tuned model.

use std::io::Write;
use std::sync::Arc;

use exhibit_core::corpus::{DatasetSplit, ExhibitionRecord};
use exhibit_core::finetune::{finetune_examples, ChatClient, ChatExample, ChatMessage};
use serde_json::{json, Value};

use crate::transport::{post_with_retry, RetryPolicy, Transport};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExportSummary {
    pub written: usize,
    /// Train exhibitions without artworks.
    pub skipped: usize,
}

pub fn example_json(example: &ChatExample) -> Value {
    let messages: Vec<Value> = example
        .messages()
        .iter()
        .map(|m| json!({ "role": m.role.as_str(), "content": m.content }))
        .collect();
    json!({ "messages": messages })
}

/// One `{"messages": [system, user, assistant]}` object per line for the
/// train split, in corpus order.
pub fn export_finetune_jsonl<W: Write>(exhibitions: &[ExhibitionRecord], split: &DatasetSplit, mut sink: W) -> Result<ExportSummary> {
    let (examples, skipped) = finetune_examples(exhibitions, split)?;
    for e in &examples {
        serde_json::to_writer(&mut sink, &example_json(e))?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(ExportSummary {
        written: examples.len(),
        skipped: skipped.len(),
    })
}

/// `POST {base}/chat/completions` with `{model, messages}`, answering with
/// the first choice's message content.
pub struct HttpChatClient {
    transport: Arc<dyn Transport>,
    url: String,
    model: String,
    api_key: Option<String>,
    pub retry: RetryPolicy,
}

impl HttpChatClient {
    pub fn new(transport: Arc<dyn Transport>, base_url: &str, model: &str, api_key: Option<String>) -> Self {
        HttpChatClient {
            transport,
            url: format!("{}/chat/completions", base_url.trim_end_matches('/')),
            model: model.into(),
            api_key,
            retry: RetryPolicy::default(),
        }
    }
}

impl ChatClient for HttpChatClient {
    fn complete(&mut self, messages: &[ChatMessage]) -> exhibit_core::Result<String> {
        let msgs: Vec<Value> = messages
            .iter()
            .map(|m| json!({ "role": m.role.as_str(), "content": m.content }))
            .collect();
        let body = json!({ "model": self.model, "messages": msgs });
        let resp = post_with_retry(self.transport.as_ref(), &self.url, self.api_key.as_deref(), &body, &self.retry).map_err(
            |(attempts, e)| exhibit_core::Error::Provider {
                attempts,
                message: e.message,
            },
        )?;
        resp.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(String::from)
            .ok_or_else(|| exhibit_core::Error::Provider {
                attempts: 1,
                message: "chat response without choices[0].message.content".into(),
            })
    }
}

/// Hyperparameters sent when creating a fine-tuning job.
#[derive(Debug, Clone, PartialEq)]
pub struct FineTuneJob {
    pub base_model: String,
    pub training_file: String,
    pub validation_file: Option<String>,
    pub batch_size: usize,
    pub learning_rate_multiplier: f64,
    pub suffix: Option<String>,
}

impl FineTuneJob {
    pub fn body(&self) -> Value {
        let mut body = json!({
            "model": self.base_model,
            "training_file": self.training_file,
            "hyperparameters": {
                "batch_size": self.batch_size,
                "learning_rate_multiplier": self.learning_rate_multiplier,
            },
        });
        if let Some(v) = &self.validation_file {
            body["validation_file"] = json!(v);
        }
        if let Some(s) = &self.suffix {
            body["suffix"] = json!(s);
        }
        body
    }

    /// Creates the job against `{base}/fine_tuning/jobs` for an already
    /// uploaded training file and returns the provider's job object.
    pub fn create(&self, transport: &dyn Transport, base_url: &str, api_key: Option<&str>, retry: &RetryPolicy) -> Result<Value> {
        let url = format!("{}/fine_tuning/jobs", base_url.trim_end_matches('/'));
        post_with_retry(transport, &url, api_key, &self.body(), retry).map_err(|(attempts, e)| {
            exhibit_core::Error::Provider {
                attempts,
                message: e.message,
            }
            .into()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::TransportError;
    use exhibit_core::finetune::{parse_prediction, query_finetuned, SYSTEM_PROMPT};
    use exhibit_core::sample;

    #[test]
    fn jsonl_lines_have_three_messages() {
        let ex = vec![sample::spanish_renaissance_exhibition(), ExhibitionRecord::new("e".into(), "".into(), vec![])];
        let split = DatasetSplit {
            train: vec![1, 0],
            validation: vec![],
            seed: 0,
        };
        let mut buf = Vec::new();
        let s = export_finetune_jsonl(&ex, &split, &mut buf).unwrap();
        assert_eq!(s, ExportSummary { written: 1, skipped: 1 });
        let text = String::from_utf8(buf).unwrap();
        let line: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        let roles: Vec<&str> = line["messages"].as_array().unwrap().iter().map(|m| m["role"].as_str().unwrap()).collect();
        assert_eq!(roles, ["system", "user", "assistant"]);
        assert_eq!(line["messages"][0]["content"], SYSTEM_PROMPT);
        let parsed = parse_prediction(line["messages"][2]["content"].as_str().unwrap()).unwrap();
        assert_eq!(parsed.rows.len(), 11);
    }

    struct Canned(Value);

    impl Transport for Canned {
        fn post_json(&self, url: &str, _: Option<&str>, body: &Value) -> std::result::Result<Value, TransportError> {
            assert!(url.ends_with("/chat/completions"));
            assert_eq!(body["model"], "ft:m");
            Ok(self.0.clone())
        }
    }

    #[test]
    fn chat_client_reads_first_choice() {
        let reply = json!({ "choices": [{ "message": { "role": "assistant", "content": sample::ASSISTANT_CONTENT } }] });
        let mut client = HttpChatClient::new(Arc::new(Canned(reply)), "http://x/v1", "ft:m", None);
        let out = query_finetuned("prompt", &mut client, 2).unwrap();
        assert_eq!((out.attempts, out.prediction.rows.len()), (1, 11));
        let mut broken = HttpChatClient::new(Arc::new(Canned(json!({}))), "http://x/v1", "ft:m", None);
        assert!(query_finetuned("prompt", &mut broken, 2).is_err());
    }

    #[test]
    fn job_body_carries_hyperparameters() {
        let job = FineTuneJob {
            base_model: "gpt-3.5-turbo".into(),
            training_file: "file-1".into(),
            validation_file: None,
            batch_size: 16,
            learning_rate_multiplier: 0.3,
            suffix: None,
        };
        let b = job.body();
        assert_eq!(b["hyperparameters"]["batch_size"], 16);
        assert_eq!(b["hyperparameters"]["learning_rate_multiplier"], 0.3);
    }
}
