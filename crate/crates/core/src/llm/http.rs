//! HTTP chat-completion client with timeout, exponential-backoff retry on
//! transport and 5xx failures, and no retry on auth errors.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{ChatClient, ChatMessage, ClientError, Completion};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClientConfig {
    pub endpoint_url: String,
    /// Name of the environment variable holding the bearer token.
    pub auth_token_env: String,
    /// Default model when an agent does not name one.
    pub model_id: String,
    pub timeout_secs: f64,
    pub max_transport_retries: u32,
    pub backoff_base_secs: f64,
    #[serde(default)]
    pub max_tokens: Option<u32>,
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            endpoint_url: "https://api.deepseek.com/v1/chat/completions".to_string(),
            auth_token_env: "CHAINLAB_API_TOKEN".to_string(),
            model_id: "deepseek-reasoner".to_string(),
            timeout_secs: 120.0,
            max_transport_retries: 3,
            backoff_base_secs: 1.0,
            max_tokens: None,
        }
    }
}

pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

pub enum TransportFailure {
    Timeout,
    Connect(String),
}

/// The raw POST, separated from the retry loop so the loop can be tested
/// with an injected transport.
pub trait Transport {
    fn post(&self, body: &serde_json::Value) -> Result<HttpResponse, TransportFailure>;
}

struct ReqwestTransport {
    client: reqwest::blocking::Client,
    url: String,
    token: String,
}

impl Transport for ReqwestTransport {
    fn post(&self, body: &serde_json::Value) -> Result<HttpResponse, TransportFailure> {
        let result = self
            .client
            .post(&self.url)
            .bearer_auth(&self.token)
            .json(body)
            .send();
        match result {
            Ok(resp) => {
                let status = resp.status().as_u16();
                let body = resp.text().unwrap_or_default();
                Ok(HttpResponse { status, body })
            }
            Err(e) if e.is_timeout() => Err(TransportFailure::Timeout),
            Err(e) => Err(TransportFailure::Connect(e.to_string())),
        }
    }
}

pub struct HttpChatClient<T = ()> {
    config: ClientConfig,
    transport: T,
}

impl HttpChatClient<()> {
    /// Build a client over reqwest. Fails before any network call when the
    /// auth environment variable is missing.
    pub fn new(config: ClientConfig) -> Result<HttpChatClient<impl Transport>, ClientError> {
        let token = std::env::var(&config.auth_token_env)
            .map_err(|_| ClientError::Auth { var: config.auth_token_env.clone() })?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_secs))
            .build()
            .map_err(|e| ClientError::Transport { detail: e.to_string(), attempts: 0 })?;
        let transport = ReqwestTransport { client, url: config.endpoint_url.clone(), token };
        Ok(HttpChatClient { config, transport })
    }
}

impl<T: Transport> HttpChatClient<T> {
    #[cfg(test)]
    pub(crate) fn with_transport(config: ClientConfig, transport: T) -> Self {
        HttpChatClient { config, transport }
    }
}

fn retryable_status(status: u16) -> bool {
    status == 408 || status == 429 || (500..600).contains(&status)
}

impl<T: Transport> ChatClient for HttpChatClient<T> {
    fn complete(
        &mut self,
        model: &str,
        messages: &[ChatMessage],
        temperature: f64,
    ) -> Result<Completion, ClientError> {
        let model = if model.is_empty() { self.config.model_id.as_str() } else { model };
        let mut body = json!({
            "model": model,
            "messages": messages,
            "temperature": temperature,
        });
        if let Some(max_tokens) = self.config.max_tokens {
            body["max_tokens"] = json!(max_tokens);
        }

        let mut retries = 0u32;
        loop {
            let attempt_result = self.transport.post(&body);
            let failure = match attempt_result {
                Ok(resp) if resp.status == 401 || resp.status == 403 => {
                    return Err(ClientError::Http { status: resp.status, body: resp.body });
                }
                Ok(resp) if retryable_status(resp.status) => {
                    format!("HTTP {}", resp.status)
                }
                Ok(resp) if resp.status >= 400 => {
                    return Err(ClientError::Http { status: resp.status, body: resp.body });
                }
                Ok(resp) => {
                    return parse_completion(&resp.body, retries);
                }
                Err(TransportFailure::Timeout) => "timeout".to_string(),
                Err(TransportFailure::Connect(detail)) => detail,
            };

            if retries >= self.config.max_transport_retries {
                return if failure == "timeout" {
                    Err(ClientError::Timeout { attempts: retries + 1 })
                } else {
                    Err(ClientError::Transport { detail: failure, attempts: retries + 1 })
                };
            }
            let backoff = self.config.backoff_base_secs * f64::from(1u32 << retries.min(16));
            if backoff > 0.0 {
                std::thread::sleep(Duration::from_secs_f64(backoff));
            }
            retries += 1;
        }
    }
}

fn parse_completion(body: &str, retries: u32) -> Result<Completion, ClientError> {
    let value: serde_json::Value = serde_json::from_str(body)
        .map_err(|e| ClientError::MalformedResponse { detail: e.to_string() })?;
    let text = value["choices"][0]["message"]["content"]
        .as_str()
        .ok_or_else(|| ClientError::MalformedResponse {
            detail: "missing choices[0].message.content".to_string(),
        })?
        .to_string();
    Ok(Completion {
        text,
        prompt_tokens: value["usage"]["prompt_tokens"].as_u64(),
        completion_tokens: value["usage"]["completion_tokens"].as_u64(),
        retries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::RefCell;

    struct Script
    {
        responses: RefCell<Vec<Result<HttpResponse, TransportFailure>>>,
    }

    impl Transport for Script {
        fn post(&self, _body: &serde_json::Value) -> Result<HttpResponse, TransportFailure> {
            self.responses.borrow_mut().remove(0)
        }
    }

    fn ok_body(text: &str) -> String {
        format!(
            r#"{{"choices":[{{"message":{{"role":"assistant","content":"{text}"}}}}],"usage":{{"prompt_tokens":12,"completion_tokens":3}}}}"#
        )
    }

    fn config() -> ClientConfig {
        ClientConfig {
            backoff_base_secs: 0.0,
            max_transport_retries: 3,
            ..Default::default()
        }
    }

    fn client(responses: Vec<Result<HttpResponse, TransportFailure>>) -> HttpChatClient<Script> {
        HttpChatClient::with_transport(config(), Script { responses: RefCell::new(responses) })
    }

    #[test]
    fn happy_path_returns_content_and_usage() {
        let mut c = client(vec![Ok(HttpResponse { status: 200, body: ok_body("[26]") })]);
        let out = c.complete("m", &[ChatMessage::user("q")], 0.0).unwrap();
        assert_eq!(out.text, "[26]");
        assert_eq!(out.prompt_tokens, Some(12));
        assert_eq!(out.retries, 0);
    }

    #[test]
    fn retries_5xx_then_succeeds() {
        let mut c = client(vec![
            Ok(HttpResponse { status: 503, body: String::new() }),
            Ok(HttpResponse { status: 503, body: String::new() }),
            Ok(HttpResponse { status: 200, body: ok_body("[7]") }),
        ]);
        let out = c.complete("m", &[ChatMessage::user("q")], 0.0).unwrap();
        assert_eq!(out.text, "[7]");
        assert_eq!(out.retries, 2);
    }

    #[test]
    fn gives_up_after_max_retries() {
        let mut c = client(vec![
            Ok(HttpResponse { status: 503, body: String::new() }),
            Ok(HttpResponse { status: 503, body: String::new() }),
            Ok(HttpResponse { status: 503, body: String::new() }),
            Ok(HttpResponse { status: 503, body: String::new() }),
        ]);
        match c.complete("m", &[ChatMessage::user("q")], 0.0) {
            Err(ClientError::Transport { attempts, .. }) => assert_eq!(attempts, 4),
            other => panic!("expected transport error, got {other:?}"),
        }
    }

    #[test]
    fn auth_failures_never_retry() {
        let mut c = client(vec![Ok(HttpResponse { status: 401, body: "nope".into() })]);
        match c.complete("m", &[ChatMessage::user("q")], 0.0) {
            Err(ClientError::Http { status: 401, .. }) => {}
            other => panic!("expected http 401, got {other:?}"),
        }
    }

    #[test]
    fn missing_env_var_fails_before_any_network() {
        let cfg = ClientConfig {
            auth_token_env: "CHAINLAB_TEST_SURELY_UNSET_TOKEN".to_string(),
            ..Default::default()
        };
        match HttpChatClient::new(cfg) {
            Err(ClientError::Auth { var }) => {
                assert_eq!(var, "CHAINLAB_TEST_SURELY_UNSET_TOKEN");
            }
            _ => panic!("expected auth error"),
        }
    }

    #[test]
    fn malformed_body_is_an_error() {
        let mut c = client(vec![Ok(HttpResponse { status: 200, body: "{}".into() })]);
        assert!(matches!(
            c.complete("m", &[ChatMessage::user("q")], 0.0),
            Err(ClientError::MalformedResponse { .. })
        ));
    }

    #[test]
    fn timeouts_retry_then_report() {
        let mut c = client(vec![
            Err(TransportFailure::Timeout),
            Err(TransportFailure::Timeout),
            Err(TransportFailure::Timeout),
            Err(TransportFailure::Timeout),
        ]);
        assert!(matches!(
            c.complete("m", &[ChatMessage::user("q")], 0.0),
            Err(ClientError::Timeout { attempts: 4 })
        ));
    }
}
