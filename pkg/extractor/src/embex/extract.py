"""Batched last-token hidden-state extraction from a causal LM.

Each instruction-response pair is formatted (model chat template or plain
concatenation), run through the model, and represented by the chosen
layer's hidden state at the last non-padding token. Sequences exceeding
the model context are truncated from the left so the response tail, whose
final token is the extraction point, survives.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import torch

from embex.corpus import read_corpus
from embex.hashing import alignment_hash_of_ids
from embex.writer import write_embeddings

logger = logging.getLogger("embex")

PRECISIONS = ("half", "single")
TEMPLATES = ("model-default", "plain-concat")


@dataclass
class ExtractionConfig:
    model: str
    corpus: str
    output: str
    batch_size: int = 8
    precision: str = "single"
    device: str = "cpu"
    template: str = "model-default"
    layer: int = -1          # index into hidden_states; -1 = final layer
    max_length: int = None   # overrides the model context length


@dataclass
class ExtractionResult:
    n: int
    d: int
    alignment_hash: int
    truncated_ids: list = field(default_factory=list)


def format_pair(instruction, response, template, tokenizer):
    if template == "plain-concat":
        return f"{instruction}\n{response}"
    if template == "model-default":
        if getattr(tokenizer, "chat_template", None) is None:
            raise ValueError(
                "tokenizer has no chat template; use --template plain-concat"
            )
        return tokenizer.apply_chat_template(
            [
                {"role": "user", "content": instruction},
                {"role": "assistant", "content": response},
            ],
            tokenize=False,
            add_generation_prompt=False,
        )
    raise ValueError(f"unknown template {template!r}")


def _load_model_and_tokenizer(config):
    from transformers import AutoModelForCausalLM, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(config.model)
    model = AutoModelForCausalLM.from_pretrained(config.model)
    return model, tokenizer


def _context_length(config, model):
    if config.max_length is not None:
        return config.max_length
    return int(getattr(model.config, "max_position_embeddings", 2048))


def extract(config, model=None, tokenizer=None):
    """Run the extraction and write the embedding file.

    model/tokenizer may be passed pre-loaded (tests, custom setups);
    otherwise they are loaded from config.model.
    """
    if config.batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    if config.precision not in PRECISIONS:
        raise ValueError(f"unknown precision {config.precision!r}")
    if config.template not in TEMPLATES:
        raise ValueError(f"unknown template {config.template!r}")

    records = read_corpus(config.corpus)
    if model is None or tokenizer is None:
        model, tokenizer = _load_model_and_tokenizer(config)

    if tokenizer.pad_token_id is None:
        if tokenizer.eos_token_id is None:
            raise ValueError("tokenizer defines neither pad nor eos token")
        tokenizer.pad_token = tokenizer.eos_token
    pad_id = tokenizer.pad_token_id

    model = model.to(config.device)
    model = model.half() if config.precision == "half" else model.float()
    model.eval()

    max_length = _context_length(config, model)
    sequences = []
    truncated_ids = []
    for record in records:
        text = format_pair(record.instruction, record.response,
                           config.template, tokenizer)
        ids = tokenizer(text)["input_ids"]
        if len(ids) > max_length:
            ids = ids[-max_length:]
            truncated_ids.append(record.id)
            logger.warning("truncated %s to the last %d tokens",
                           record.id, max_length)
        sequences.append(ids)

    rows = []
    with torch.inference_mode():
        for start in range(0, len(sequences), config.batch_size):
            batch = sequences[start:start + config.batch_size]
            width = max(len(ids) for ids in batch)
            input_ids = torch.full((len(batch), width), pad_id,
                                   dtype=torch.long)
            mask = torch.zeros((len(batch), width), dtype=torch.long)
            for k, ids in enumerate(batch):
                input_ids[k, :len(ids)] = torch.tensor(ids, dtype=torch.long)
                mask[k, :len(ids)] = 1
            output = model(
                input_ids=input_ids.to(config.device),
                attention_mask=mask.to(config.device),
                output_hidden_states=True,
            )
            states = output.hidden_states[config.layer]
            last = mask.sum(dim=1) - 1
            gathered = states[torch.arange(len(batch)), last.to(config.device)]
            rows.append(gathered.float().cpu().numpy())

    matrix = np.vstack(rows).astype(np.float32)
    expected_d = int(getattr(model.config, "hidden_size", matrix.shape[1]))
    if matrix.shape[1] != expected_d:
        raise RuntimeError(
            f"extracted dimension {matrix.shape[1]} != hidden size {expected_d}"
        )
    alignment_hash = alignment_hash_of_ids([r.id for r in records])
    write_embeddings(matrix, alignment_hash, config.output)
    return ExtractionResult(
        n=matrix.shape[0],
        d=matrix.shape[1],
        alignment_hash=alignment_hash,
        truncated_ids=truncated_ids,
    )
