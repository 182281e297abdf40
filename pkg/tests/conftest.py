import numpy as np
import pytest

from collidekit.corpus import Corpus, Intent, Query, normalize_text

CARRIERS = ["please", "can", "you", "i", "want", "to", "now", "my", "the",
            "me", "a", "do", "need", "would", "like"]

# generic content words sprinkled into every topic, mimicking the shared
# vocabulary real datasets have beyond their distinctive terms
GENERIC = [f"gen{i}" for i in range(40)]


def make_query(qid: str, text: str) -> Query:
    return Query(id=qid, text=text, norm_text=normalize_text(text))


def make_intent(dataset_id: str, name: str, texts: list[str]) -> Intent:
    intent = Intent(dataset_id=dataset_id, name=name)
    for i, text in enumerate(texts):
        intent.queries.append(make_query(f"{dataset_id}/{name}/{i}", text))
    return intent


def make_corpus(dataset_id: str, intents: dict[str, list[str]]) -> Corpus:
    corpus = Corpus(dataset_id=dataset_id)
    for name, texts in intents.items():
        corpus.intents[name] = make_intent(dataset_id, name, texts)
    return corpus


def topic_vocab(topic: str, size: int = 10) -> list[str]:
    return [f"{topic}w{i}" for i in range(size)]


def sample_topic_texts(topic: str, n: int, rng: np.random.Generator,
                       n_content: tuple[int, int] = (3, 6),
                       n_carrier: tuple[int, int] = (1, 3)) -> list[str]:
    """Template sampler: a few shared carrier words plus topic content words."""
    vocab = topic_vocab(topic)
    texts = []
    for _ in range(n):
        content = list(rng.choice(vocab, size=int(rng.integers(*n_content)),
                                  replace=True))
        carriers = list(rng.choice(CARRIERS, size=int(rng.integers(*n_carrier)),
                                   replace=False))
        generic = list(rng.choice(GENERIC, size=int(rng.integers(1, 4)),
                                  replace=False))
        words = carriers + generic + content
        texts.append(" ".join(words))
    return texts


@pytest.fixture
def tiny_corpus() -> Corpus:
    return make_corpus("demo", {
        "weather": ["what's the weather like today", "tell me the weather in new york"],
        "alarm": ["set alarm tomorrow at 6 am", "make an alarm for 4pm",
                  "wake me up at noon"],
    })
