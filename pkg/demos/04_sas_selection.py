"""
Asking the model which augmentation to use
==========================================

The selection pass renders a prompt, runs one greedy text generation and
parses the ``Choice:`` line. Here the backend is a scripted one, so the
answer is canned, but the plumbing is the same as with a real server.
"""
from savcd import parse_g, render_prompt, select_augmentation
from savcd.backend import SyntheticBackend, SyntheticScript

query = "What color is the umbrella?"
prompt = render_prompt("minimal", query)
print(prompt.rendered_text[-300:])

script = SyntheticScript(
    vocab_size=4,
    end_token=3,
    completions={query: "Reason: the question is about color.\nChoice: color inversion"},
)
outcome = select_augmentation(SyntheticBackend(script), query, template_id="full")
print(outcome.choice.value, outcome.valid, repr(outcome.reason))

# Unusable answers fall back instead of raising.
print(parse_g("I would rotate it by 90 degrees."))
