import json

import pytest
import torch
from tokenizers import Tokenizer, models, pre_tokenizers
from transformers import LlamaConfig, LlamaForCausalLM, PreTrainedTokenizerFast

WORDS = [
    "question", "answer", "about", "topic", "words", "the", "a", "with",
    "please", "explain", "translate", "summarize", "short", "text", "more",
] + [f"tok{i}" for i in range(40)]

HIDDEN_SIZE = 32
MAX_POSITIONS = 48


@pytest.fixture(scope="session")
def tiny_tokenizer():
    vocab = {"[PAD]": 0, "[UNK]": 1, "[EOS]": 2}
    for word in WORDS:
        vocab[word] = len(vocab)
    tok = Tokenizer(models.WordLevel(vocab, unk_token="[UNK]"))
    tok.pre_tokenizer = pre_tokenizers.Whitespace()
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tok,
        pad_token="[PAD]",
        unk_token="[UNK]",
        eos_token="[EOS]",
    )
    fast.chat_template = (
        "{% for m in messages %}{{ m['content'] }}{% if not loop.last %}"
        " {% endif %}{% endfor %}"
    )
    return fast


@pytest.fixture(scope="session")
def tiny_model(tiny_tokenizer):
    config = LlamaConfig(
        vocab_size=len(tiny_tokenizer.get_vocab()),
        hidden_size=HIDDEN_SIZE,
        intermediate_size=64,
        num_hidden_layers=2,
        num_attention_heads=4,
        num_key_value_heads=4,
        max_position_embeddings=MAX_POSITIONS,
    )
    torch.manual_seed(1234)
    return LlamaForCausalLM(config).eval()


def write_corpus(path, n, langs=("en", "fr", "zh", "sw")):
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(n):
            record = {
                "id": f"s{i:05d}",
                "lang": langs[i % len(langs)],
                "instruction": f"question about topic tok{i % 37}",
                "response": f"answer with words tok{(i * 3) % 37} tok{i % 11}",
            }
            fh.write(json.dumps(record) + "\n")
    return path
