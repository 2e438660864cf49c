#!/usr/bin/env python3
"""Convert a Hugging Face GPT-2 checkpoint into a densitrace model directory.

    python3 tools/export_gpt2.py --hf gpt2 --out models/gpt2-small

--hf takes a hub id or a local directory (anything GPT2LMHeadModel.from_pretrained
accepts). The output directory receives model.safetensors (F32), config.json and,
when the source has them, vocab.json and merges.txt.
"""

import argparse
import json
import shutil
from pathlib import Path

import numpy as np
from safetensors.numpy import save_file


def convert(model):
    cfg = model.config
    if cfg.activation_function not in ("gelu_new", "gelu_pytorch_tanh"):
        raise SystemExit(f"unsupported activation {cfg.activation_function}; the runtime uses tanh GELU")
    sd = {k: v.detach().float().cpu().numpy() for k, v in model.state_dict().items()}
    d = cfg.n_embd
    out = {
        "wte": sd["transformer.wte.weight"],
        "wpe": sd["transformer.wpe.weight"],
        "ln_f.weight": sd["transformer.ln_f.weight"],
        "ln_f.bias": sd["transformer.ln_f.bias"],
    }
    lm_head = sd.get("lm_head.weight")
    if lm_head is not None and not np.array_equal(lm_head, out["wte"]):
        out["unembed"] = lm_head
    for l in range(cfg.n_layer):
        h = f"transformer.h.{l}."
        p = f"layers.{l}."
        # Conv1D stores weights as [in, out], which is already the x @ W layout.
        w_qkv, b_qkv = sd[h + "attn.c_attn.weight"], sd[h + "attn.c_attn.bias"]
        out[p + "ln1.weight"] = sd[h + "ln_1.weight"]
        out[p + "ln1.bias"] = sd[h + "ln_1.bias"]
        for i, name in enumerate("qkv"):
            out[p + f"attn.w{name}"] = w_qkv[:, i * d:(i + 1) * d]
            out[p + f"attn.b{name}"] = b_qkv[i * d:(i + 1) * d]
        out[p + "attn.wo"] = sd[h + "attn.c_proj.weight"]
        out[p + "attn.bo"] = sd[h + "attn.c_proj.bias"]
        out[p + "ln2.weight"] = sd[h + "ln_2.weight"]
        out[p + "ln2.bias"] = sd[h + "ln_2.bias"]
        out[p + "mlp.w_in"] = sd[h + "mlp.c_fc.weight"]
        out[p + "mlp.b_in"] = sd[h + "mlp.c_fc.bias"]
        out[p + "mlp.w_out"] = sd[h + "mlp.c_proj.weight"]
        out[p + "mlp.b_out"] = sd[h + "mlp.c_proj.bias"]
    config = {
        "n_layers": cfg.n_layer,
        "n_heads": cfg.n_head,
        "d_model": d,
        "d_head": d // cfg.n_head,
        "d_mlp": cfg.n_inner or 4 * d,
        "vocab_size": cfg.vocab_size,
        "max_seq_len": cfg.n_positions,
        "ln_epsilon": cfg.layer_norm_epsilon,
        "activation": "gelu",
    }
    return {k: np.ascontiguousarray(v, dtype=np.float32) for k, v in out.items()}, config


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--hf", required=True, help="hub id or local checkpoint directory")
    ap.add_argument("--out", required=True, type=Path)
    ap.add_argument("--reference-ids", help="comma-separated ids; also write reference.json with the next-token distribution")
    args = ap.parse_args()

    import torch
    from transformers import GPT2LMHeadModel

    model = GPT2LMHeadModel.from_pretrained(args.hf).eval()
    tensors, config = convert(model)
    args.out.mkdir(parents=True, exist_ok=True)
    save_file(tensors, str(args.out / "model.safetensors"), metadata={"format": "densitrace-gpt2"})
    (args.out / "config.json").write_text(json.dumps(config, indent=2) + "\n")

    src = Path(args.hf)
    for name in ("vocab.json", "merges.txt"):
        if (src / name).is_file():
            shutil.copy(src / name, args.out / name)

    if args.reference_ids:
        ids = [int(x) for x in args.reference_ids.split(",")]
        with torch.no_grad():
            logits = model(torch.tensor([ids])).logits[0, -1].double()
        probs = torch.softmax(logits, dim=-1).tolist()
        (args.out / "reference.json").write_text(json.dumps({"ids": ids, "probs": probs}))
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
