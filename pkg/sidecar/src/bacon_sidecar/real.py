"""Real-model backends, loaded lazily per endpoint role.

Each loader imports its deep-learning dependency on first use and
raises ModelLoadError when the model (or its weights) cannot be
obtained; the HTTP layer turns that into a 503. Keeping the loaders
separate means a missing detector does not take down the embedding
endpoint.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .config import BackendConfig


class ModelLoadError(RuntimeError):
    pass


def _resolve_image(image_root: str, image_id: str) -> Path:
    root = Path(image_root)
    direct = root / image_id
    if direct.is_file():
        return direct
    for ext in (".jpg", ".jpeg", ".png", ".webp"):
        candidate = root / f"{image_id}{ext}"
        if candidate.is_file():
            return candidate
    raise FileNotFoundError(f"image {image_id!r} not under {image_root!r}")


class RealModelSet:
    """CLIP-class text/crop embedder, open-vocabulary region proposer,
    similarity-based region judge, and a text-to-text QA model."""

    def __init__(self, cfg: BackendConfig):
        self.cfg = cfg
        self._clip = None
        self._detector = None
        self._qa_pipe = None
        # eagerly load the embedder so /v1/health reports the true dim
        self._load_clip()
        self.dim = int(self._clip["model"].config.projection_dim)

    def _load_clip(self):
        if self._clip is not None:
            return
        try:
            import torch  # noqa: F401
            from transformers import CLIPModel, CLIPProcessor

            model = CLIPModel.from_pretrained(self.cfg.models.text_embedder)
            model.to(self.cfg.device).eval()
            processor = CLIPProcessor.from_pretrained(self.cfg.models.text_embedder)
            self._clip = {"model": model, "processor": processor}
        except Exception as exc:
            raise ModelLoadError(f"embedder load failed: {exc}") from exc

    def _load_detector(self):
        if self._detector is not None:
            return
        try:
            from transformers import pipeline

            self._detector = pipeline(
                "zero-shot-object-detection",
                model=self.cfg.models.region_proposer,
                device=-1 if self.cfg.device == "cpu" else self.cfg.device,
            )
        except Exception as exc:
            raise ModelLoadError(f"proposer load failed: {exc}") from exc

    def _load_qa(self):
        if self._qa_pipe is not None:
            return
        try:
            from transformers import pipeline

            self._qa_pipe = pipeline(
                "text2text-generation",
                model=self.cfg.models.qa,
                device=-1 if self.cfg.device == "cpu" else self.cfg.device,
            )
        except Exception as exc:
            raise ModelLoadError(f"qa load failed: {exc}") from exc

    def embed(self, texts: list[str]) -> list[list[float]]:
        import torch

        self._load_clip()
        out = []
        with torch.no_grad():
            for text in texts:
                if not text.strip():
                    out.append([0.0] * self.dim)
                    continue
                inputs = self._clip["processor"](
                    text=[text], return_tensors="pt", truncation=True
                ).to(self.cfg.device)
                features = self._clip["model"].get_text_features(**inputs)[0]
                features = features / features.norm()
                out.append([float(v) for v in features.cpu().numpy()])
        return out

    def _crop(self, image_id: str, box: list[float]):
        from PIL import Image

        image = Image.open(_resolve_image(self.cfg.image_root, image_id)).convert("RGB")
        w, h = image.size
        x1, y1, x2, y2 = box
        return image.crop((x1 * w, y1 * h, x2 * w, y2 * h))

    def propose(self, image_id: str, query: str) -> list[dict]:
        from PIL import Image

        self._load_detector()
        image = Image.open(_resolve_image(self.cfg.image_root, image_id)).convert("RGB")
        w, h = image.size
        detections = self._detector(image, candidate_labels=[query])
        regions = []
        for det in detections:
            box = det["box"]
            coords = [
                max(0.0, min(1.0, box["xmin"] / w)),
                max(0.0, min(1.0, box["ymin"] / h)),
                max(0.0, min(1.0, box["xmax"] / w)),
                max(0.0, min(1.0, box["ymax"] / h)),
            ]
            if coords[0] < coords[2] and coords[1] < coords[3]:
                regions.append({"box": coords, "confidence": float(det["score"])})
        regions.sort(key=lambda r: -r["confidence"])
        return regions

    def score_crop(self, image_id: str, box: list[float], text: str) -> float:
        import torch

        self._load_clip()
        crop = self._crop(image_id, box)
        with torch.no_grad():
            inputs = self._clip["processor"](
                text=[text], images=crop, return_tensors="pt", truncation=True
            ).to(self.cfg.device)
            output = self._clip["model"](**inputs)
            image_emb = output.image_embeds[0]
            text_emb = output.text_embeds[0]
            sim = torch.nn.functional.cosine_similarity(
                image_emb[None], text_emb[None]
            ).item()
        return float(np.clip((sim + 1.0) / 2.0, 0.0, 1.0))

    def judge(self, image_id: str, box: list[float], name: str) -> dict:
        score = self.score_crop(image_id, box, f"a photo of a {name}")
        return {"keep": score >= self.cfg.judge_threshold, "score": score}

    def answer(self, context: str, question: str) -> str:
        if not context.strip():
            return "unknown"
        self._load_qa()
        prompt = f"Answer from the caption.\nCaption: {context}\nQuestion: {question}"
        result = self._qa_pipe(prompt, max_new_tokens=32)
        text = result[0]["generated_text"].strip()
        return text or "unknown"
