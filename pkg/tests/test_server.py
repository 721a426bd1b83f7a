import base64
import json
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
import requests

from stitchvox import (
    SpeakerPolicy,
    StitchConfig,
    StitchServer,
    StitchService,
    stitch_sentence,
    wav_bytes,
)
from stitchvox.seeds import derive_seed


@pytest.fixture(scope="module")
def server(toy_bank):
    srv = StitchServer(StitchService(toy_bank), host="127.0.0.1", port=0)
    srv.start()
    yield srv
    srv.shutdown()


@pytest.fixture(scope="module")
def base_url(server):
    return server.base_url


class TestBasicEndpoints:
    def test_healthz(self, base_url):
        resp = requests.get(f"{base_url}/healthz", timeout=5)
        assert resp.status_code == 200
        assert resp.text == "ok"

    def test_bank_info(self, base_url, toy_bank):
        resp = requests.get(f"{base_url}/v1/bank", timeout=5)
        assert resp.status_code == 200
        info = resp.json()
        assert info["speakers"] == list(toy_bank.speakers)
        assert info["vocab_size"] == len(toy_bank.vocab)
        assert info["sample_rate_hz"] == toy_bank.bank_rate_hz

    def test_unknown_path(self, base_url):
        assert requests.get(f"{base_url}/nope", timeout=5).status_code == 404
        assert requests.post(f"{base_url}/nope", json={}, timeout=5).status_code == 404


class TestStitchEndpoint:
    def test_matches_local_library_call(self, base_url, toy_bank):
        resp = requests.post(
            f"{base_url}/v1/stitch",
            json={"text": "i like apples", "seed": 42},
            timeout=10,
        )
        assert resp.status_code == 200
        assert resp.headers["Content-Type"] == "audio/wav"
        local, report = stitch_sentence(
            "i like apples", toy_bank, SpeakerPolicy.uniform(), StitchConfig(), 42
        )
        assert resp.content == wav_bytes(local)
        header_report = json.loads(resp.headers["X-Stitch-Report"])
        assert header_report == report.to_dict()

    def test_empty_text_is_400(self, base_url):
        resp = requests.post(f"{base_url}/v1/stitch", json={"text": ""}, timeout=5)
        assert resp.status_code == 400
        assert resp.json()["error"] == "empty text"

    def test_unstitchable_text_is_400(self, base_url):
        resp = requests.post(f"{base_url}/v1/stitch", json={"text": "— ,"}, timeout=5)
        assert resp.status_code == 400

    def test_unknown_speaker_is_400(self, base_url):
        resp = requests.post(
            f"{base_url}/v1/stitch", json={"text": "i like apples", "speaker": "zz"},
            timeout=5,
        )
        assert resp.status_code == 400

    def test_fixed_speaker_and_rate(self, base_url, toy_bank):
        resp = requests.post(
            f"{base_url}/v1/stitch",
            json={"text": "word", "speaker": "v1", "seed": 7, "output_rate_hz": 16000},
            timeout=10,
        )
        local, _ = stitch_sentence(
            "word", toy_bank, SpeakerPolicy.fixed("v1"),
            StitchConfig(output_rate_hz=16000), 7,
        )
        assert resp.content == wav_bytes(local)

    def test_missing_seed_is_stable(self, base_url):
        a = requests.post(f"{base_url}/v1/stitch", json={"text": "good data"}, timeout=10)
        b = requests.post(f"{base_url}/v1/stitch", json={"text": "good data"}, timeout=10)
        assert a.content == b.content

    def test_invalid_json_is_400(self, base_url):
        resp = requests.post(
            f"{base_url}/v1/stitch", data=b"{nope",
            headers={"Content-Type": "application/json"}, timeout=5,
        )
        assert resp.status_code == 400

    def test_concurrent_identical_requests_identical_bytes(self, base_url):
        def fetch(_):
            return requests.post(
                f"{base_url}/v1/stitch", json={"text": "we like speech", "seed": 5},
                timeout=30,
            )

        with ThreadPoolExecutor(max_workers=16) as pool:
            responses = list(pool.map(fetch, range(16)))
        assert all(r.status_code == 200 for r in responses)
        assert len({r.content for r in responses}) == 1

    def test_fifty_concurrent_requests_succeed(self, base_url):
        def fetch(i):
            return requests.post(
                f"{base_url}/v1/stitch",
                json={"text": "i like apple sound", "seed": i},
                timeout=60,
            )

        with ThreadPoolExecutor(max_workers=50) as pool:
            responses = list(pool.map(fetch, range(50)))
        assert all(r.status_code == 200 for r in responses)


class TestBatchEndpoint:
    def test_order_and_self_consistency(self, base_url, toy_bank):
        items = [{"id": f"b{i}", "text": "i like apple"} for i in range(3)]
        resp = requests.post(
            f"{base_url}/v1/batch", json={"items": items, "seed": 11}, timeout=30
        )
        assert resp.status_code == 200
        assert resp.headers["Content-Type"] == "application/x-ndjson"
        lines = [json.loads(l) for l in resp.text.splitlines() if l]
        assert [l["id"] for l in lines] == ["b0", "b1", "b2"]
        for line in lines:
            wav = base64.b64decode(line["wav_base64"])
            samples = np.frombuffer(wav[44:], dtype="<i2")
            assert len(samples) == line["n_frames"]
            assert line["report"]["n_samples"] == line["n_frames"]

    def test_per_item_seed_derivation_matches_local(self, base_url, toy_bank):
        resp = requests.post(
            f"{base_url}/v1/batch",
            json={"items": [{"id": "k1", "text": "good sound"}], "seed": 3},
            timeout=30,
        )
        line = json.loads(resp.text.splitlines()[0])
        local, _ = stitch_sentence(
            "good sound", toy_bank, SpeakerPolicy.uniform(), StitchConfig(),
            derive_seed(3, "k1"),
        )
        assert base64.b64decode(line["wav_base64"]) == wav_bytes(local)

    def test_deterministic_bodies(self, base_url):
        payload = {"items": [{"id": f"x{i}", "text": "we like data"} for i in range(4)],
                   "seed": 8}
        a = requests.post(f"{base_url}/v1/batch", json=payload, timeout=30)
        b = requests.post(f"{base_url}/v1/batch", json=payload, timeout=30)
        assert a.content == b.content

    def test_item_errors_do_not_fail_batch(self, base_url):
        items = [
            {"id": "ok", "text": "i like apple"},
            {"id": "bad", "text": "—"},
            {"id": "ok2", "text": "word"},
        ]
        resp = requests.post(f"{base_url}/v1/batch", json={"items": items, "seed": 0},
                             timeout=30)
        assert resp.status_code == 200
        lines = [json.loads(l) for l in resp.text.splitlines() if l]
        assert [l["id"] for l in lines] == ["ok", "bad", "ok2"]
        assert "error" in lines[1] and "wav_base64" not in lines[1]
        assert "wav_base64" in lines[0] and "wav_base64" in lines[2]

    def test_oversized_batch_is_413(self, toy_bank):
        srv = StitchServer(StitchService(toy_bank, max_batch=4), host="127.0.0.1", port=0)
        srv.start()
        try:
            items = [{"id": f"i{i}", "text": "word"} for i in range(5)]
            resp = requests.post(f"{srv.base_url}/v1/batch",
                                 json={"items": items, "seed": 0}, timeout=10)
            assert resp.status_code == 413
        finally:
            srv.shutdown()


class TestCsEndpoint:
    def test_not_configured_is_400(self, base_url):
        resp = requests.post(
            f"{base_url}/v1/cs-stitch", json={"text": "i like apple", "p": 1.0, "n": 1},
            timeout=10,
        )
        assert resp.status_code == 400
        assert "not configured" in resp.json()["error"]

    def test_cs_stitch_round_trip(self, toy_bank, tmp_path_factory):
        from stitchvox import CsDictionary, synthesize_bank
        from stitchvox.bank import MockTtsAdapter
        from stitchvox.codeswitch import CsConfig, cs_stitch

        root = tmp_path_factory.mktemp("cs_srv")
        (root / "tgt.txt").write_text("uno\ndos\n")
        tgt = synthesize_bank(root / "tgt.txt", ["b0"], MockTtsAdapter(), root / "tgt")
        dictionary = CsDictionary(entries={"like": "uno", "word": "dos"},
                                  source_lang="src", target_lang="tgt")
        banks = {"src": toy_bank, "tgt": tgt}
        srv = StitchServer(StitchService(toy_bank, banks, dictionary),
                           host="127.0.0.1", port=0)
        srv.start()
        try:
            resp = requests.post(
                f"{srv.base_url}/v1/cs-stitch",
                json={"text": "i like apple", "seed": 4, "p": 1.0, "n": 2},
                timeout=10,
            )
            assert resp.status_code == 200
            local, _, cs_report = cs_stitch(
                "i like apple", banks, dictionary, CsConfig(p=1.0, n=2),
                StitchConfig(), SpeakerPolicy.uniform(), 4,
            )
            assert resp.content == wav_bytes(local)
            header = json.loads(resp.headers["X-Stitch-Report"])
            assert header["code_switch"] == cs_report.to_dict()
        finally:
            srv.shutdown()
