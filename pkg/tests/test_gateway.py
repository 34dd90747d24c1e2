import numpy as np
import pytest

from dashcoach.catalog import CONDITIONAL, EXHAUSTIVE, expand_for_clip
from dashcoach.errors import EndpointTimeout, ProtocolError
from dashcoach.frames import MergedFrameSet
from dashcoach.gateway import (
    ChatTurn,
    GenerationParams,
    InferenceClient,
    InferenceRequest,
    RetryPolicy,
    frames_to_payload,
    run_dialogue,
)

import stubproto

PARAMS = GenerationParams(seed=42)
FAST_RETRY = RetryPolicy(attempts=3, backoff_s=0.0, timeout_s=2.0)


def _request(text="Did it happen?", media=None):
    return InferenceRequest(
        media=media or {"video_path": "/tmp/clip.mp4"},
        turns=[ChatTurn("user", text)],
        params=PARAMS,
    )


def _merged(k=2):
    frames = [np.full((8, 16, 3), 17 * (i + 1), dtype=np.uint8) for i in range(k)]
    return MergedFrameSet(
        clip_id="m", frames=frames, timestamps=[0.5 + i for i in range(k)], width=16, height=8
    )


class CountingTransport:
    """Fails a fixed number of times before delegating to a responder."""

    def __init__(self, failures=0, exc=EndpointTimeout("no answer"), responder=None):
        self.failures = failures
        self.exc = exc
        self.responder = responder
        self.calls = 0

    def post(self, url, payload, timeout_s):
        self.calls += 1
        if self.calls <= self.failures:
            raise self.exc
        if self.responder is None:
            raise self.exc
        return self.responder(url, payload)


class TestQueryModel:
    def test_stub_returns_identical_text_for_identical_requests(self, stub_server):
        client = InferenceClient(stub_server.url, retry=FAST_RETRY)
        req = _request(media=frames_to_payload(_merged()))
        assert client.infer(req) == client.infer(req)

    def test_different_media_digest_is_still_deterministic(self, stub_server):
        client = InferenceClient(stub_server.url, retry=FAST_RETRY)
        a = client.infer(_request(media=frames_to_payload(_merged(2))))
        b = client.infer(_request(media=frames_to_payload(_merged(3))))
        assert a == client.infer(_request(media=frames_to_payload(_merged(2))))
        assert b == client.infer(_request(media=frames_to_payload(_merged(3))))

    def test_timeout_after_bounded_retries(self):
        transport = CountingTransport(failures=99)
        client = InferenceClient("http://fake", retry=FAST_RETRY, transport=transport)
        with pytest.raises(EndpointTimeout):
            client.infer(_request())
        assert transport.calls == 3

    def test_retry_then_success(self):
        transport = CountingTransport(failures=2, responder=lambda u, p: {"text": "Yes."})
        client = InferenceClient("http://fake", retry=FAST_RETRY, transport=transport)
        assert client.infer(_request()) == "Yes."
        assert transport.calls == 3

    def test_zero_turns_is_a_precondition_error(self):
        transport = CountingTransport(responder=lambda u, p: {"text": "x"})
        client = InferenceClient("http://fake", retry=FAST_RETRY, transport=transport)
        bad = InferenceRequest(media={"video_path": "v"}, turns=[], params=PARAMS)
        with pytest.raises(ValueError):
            client.infer(bad)
        assert transport.calls == 0  # no network call

    def test_frame_count_invariant(self):
        transport = CountingTransport(responder=lambda u, p: {"text": "x"})
        client = InferenceClient("http://fake", retry=FAST_RETRY, transport=transport)
        req = _request(media=frames_to_payload(_merged(2)))
        with pytest.raises(ValueError, match="frames"):
            client.infer(req, expected_frames=8)
        assert transport.calls == 0

    def test_missing_text_field_is_protocol_error(self):
        transport = CountingTransport(responder=lambda u, p: {"output": "x"})
        client = InferenceClient("http://fake", retry=FAST_RETRY, transport=transport)
        with pytest.raises(ProtocolError):
            client.infer(_request())

    def test_categorical_question_yields_an_option(self, stub_server):
        client = InferenceClient(stub_server.url, retry=FAST_RETRY)
        text = client.infer(_request("What is the road condition Dry, Wet or Icy?"))
        assert any(label.lower() in text.lower() for label in ("dry", "wet", "icy"))


class TestEmbed:
    def test_stub_embeddings_are_unit_norm_dim_64(self, stub_server):
        client = InferenceClient(stub_server.url, retry=FAST_RETRY)
        (matrix,) = client.embed(["hello"])
        assert matrix.dim == 64
        assert matrix.tokens == ["hello"]
        assert np.linalg.norm(matrix.vectors[0]) == pytest.approx(1.0, abs=1e-6)

    def test_identical_tokens_identical_rows(self, stub_server):
        client = InferenceClient(stub_server.url, retry=FAST_RETRY)
        (matrix,) = client.embed(["hello hello"])
        assert np.array_equal(matrix.vectors[0], matrix.vectors[1])

    def test_empty_batch_is_precondition_error(self, stub_server):
        client = InferenceClient(stub_server.url, retry=FAST_RETRY)
        with pytest.raises(ValueError):
            client.embed([])

    def test_mixed_dims_name_the_offending_index(self):
        def responder(url, payload):
            return {
                "embeddings": [
                    {"tokens": ["a"], "vectors": [[1.0, 0.0]]},
                    {"tokens": ["b"], "vectors": [[1.0, 0.0, 0.0]]},
                ],
                "dim": 2,
            }

        client = InferenceClient(
            "http://fake", retry=FAST_RETRY, transport=CountingTransport(responder=responder)
        )
        with pytest.raises(ProtocolError, match="#1"):
            client.embed(["a", "b"])

    def test_cross_call_consistency(self, stub_server):
        client = InferenceClient(stub_server.url, retry=FAST_RETRY)
        (m1,) = client.embed(["hello"])
        (m2,) = client.embed(["hello"])
        assert float(m1.vectors[0] @ m2.vectors[0]) == pytest.approx(1.0, abs=1e-9)


class TestRunDialogue:
    def _run(self, stub_server, catalog, rules, mode, media=None, client=None):
        instances = expand_for_clip(catalog, "clip1", mode)
        client = client or InferenceClient(stub_server.url, retry=FAST_RETRY)
        return run_dialogue(
            client,
            media or frames_to_payload(_merged()),
            instances,
            catalog,
            rules,
            PARAMS,
            mode,
        )

    def test_exhaustive_has_22_entries(self, stub_server, catalog, rules):
        transcript = self._run(stub_server, catalog, rules, EXHAUSTIVE)
        assert len(transcript.entries) == 22

    def test_deterministic_across_runs(self, stub_server, catalog, rules):
        t1 = self._run(stub_server, catalog, rules, EXHAUSTIVE)
        t2 = self._run(stub_server, catalog, rules, EXHAUSTIVE)
        assert [(e.instance, e.raw_response, e.parsed) for e in t1.entries] == [
            (e.instance, e.raw_response, e.parsed) for e in t2.entries
        ]

    def test_conditional_skips_followups_of_non_affirmative_parents(
        self, stub_server, catalog, rules
    ):
        transcript = self._run(stub_server, catalog, rules, CONDITIONAL)
        answered = {e.instance.template_id: e.parsed for e in transcript.entries}
        by_turn = {e.instance.turn_index: e for e in transcript.entries}
        for t in catalog.templates:
            parent_id = catalog.parent_id(t.id)
            if parent_id is None:
                continue
            parent_entry = answered.get(parent_id)
            if t.id in answered:
                assert parent_entry is not None and parent_entry.variant == "affirmative"
        # and at least one follow-up was actually skipped by this stub seed
        assert len(transcript.entries) < 22
        turns = [e.instance.turn_index for e in transcript.entries]
        assert turns == sorted(turns)
        assert len(by_turn) == len(transcript.entries)

    def test_turn_error_is_contained(self, catalog, rules):
        fail_at = {"count": 0}

        def responder(url, payload):
            fail_at["count"] += 1
            if fail_at["count"] == 5:
                raise EndpointTimeout("turn 5 never answers")
            question = payload["turns"][-1]["content"]
            return {"text": stubproto.stub_infer(42, payload["media"], [{"role": "user", "content": question}])}

        client = InferenceClient(
            "http://fake",
            retry=RetryPolicy(attempts=1, backoff_s=0.0, timeout_s=1.0),
            transport=CountingTransport(responder=responder),
        )
        transcript = self._run(None, catalog, rules, EXHAUSTIVE, client=client)
        assert len(transcript.entries) == 22
        errored = [e for e in transcript.entries if e.error]
        assert len(errored) == 1
        assert errored[0].instance.turn_index == 4
        assert errored[0].parsed.variant == "unparseable"
        # subsequent entries still present and answered
        assert transcript.entries[5].raw_response

    def test_history_grows_in_chat_style(self, catalog, rules):
        seen_turn_counts = []

        def responder(url, payload):
            seen_turn_counts.append(len(payload["turns"]))
            return {"text": "Yes."}

        client = InferenceClient(
            "http://fake", retry=FAST_RETRY, transport=CountingTransport(responder=responder)
        )
        self._run(None, catalog, rules, EXHAUSTIVE, client=client)
        # 1 user turn, then 2 prior + 1, then 4 prior + 1, ...
        assert seen_turn_counts == [1 + 2 * i for i in range(22)]
