"""
Decoding against an HTTP backend
================================

Starts the bundled stub server on a free port, serving the demo script,
and decodes through the HTTP client. The tokens match an in-process run.
"""
import numpy as np

from savcd import DecodingParams, augment, decode
from savcd.backend import HttpBackend, SyntheticBackend, SyntheticScript
from savcd.backend.stub_server import StubServer
from savcd.harness import asset_path

script = SyntheticScript.load(asset_path("demo_script.json"))
image = augment.load_png(asset_path("demo_image.png"))
amateur = augment.vertical_flip(image)
params = DecodingParams(seed=7)

with StubServer(script) as server:
    print("stub listening on", server.url)
    remote = decode(HttpBackend(server.url), image, amateur, script.prompt_tokens, params)

local = decode(SyntheticBackend(script), image, amateur, script.prompt_tokens, params)
print("remote:", remote.tokens)
print("local: ", local.tokens)
print("candidate sizes:", [s.candidate_count for s in remote.traces])
assert remote.tokens == local.tokens
np.testing.assert_array_equal(remote.traces[0].expert_logits, local.traces[0].expert_logits)
