"""End-to-end orchestration: featurize, train, tag, evaluate documents."""

from __future__ import annotations

from typing import Iterable, Optional, Sequence as Seq

from . import crf, evaluation, features, normalizer, postproc
from .config import RunConfig
from .corpus import (Document, Sequence, bio_to_spans, doc_spans,
                     span_char_range, with_labels)
from .normalizer import Anchor, Timex


def _feature_context(config: RunConfig):
    lex = (features.Lexicons(config.lexicon_dir)
           if config.lexicon_dir else features.default_lexicons())
    fc = features.profile_config(config.profile)
    gaz = None
    if fc.use_gazetteers:
        gaz = features.default_gazetteers(config.gazetteer_dir)
    return fc, lex, gaz


def featurize_corpus(docs: Seq[Document], config: RunConfig):
    """Expanded observation features and gold labels, sequence by
    sequence, across all documents."""
    fc, lex, gaz = _feature_context(config)
    feats, labels = [], []
    for doc in docs:
        for seq in doc.sequences:
            feats.append(features.featurize_sequence(seq, fc, lex, gaz))
            labels.append(list(seq.gold_labels) if seq.gold_labels
                          else ["O"] * len(seq))
    return feats, labels


def train_on_docs(docs: Seq[Document], config: RunConfig
                  ) -> tuple[crf.CrfModel, postproc.PriorTable]:
    feats, labels = featurize_corpus(docs, config)
    model = crf.train(
        feats, labels,
        crf.TrainConfig(config.c, config.eta, config.max_iter,
                        config.cutoff),
        profile=config.profile)
    priors = postproc.build_prior_table(docs)
    return model, priors


def train_on_sequences(seqs: Seq[Sequence], config: RunConfig
                       ) -> crf.CrfModel:
    fc, lex, gaz = _feature_context(config)
    feats = [features.featurize_sequence(s, fc, lex, gaz) for s in seqs]
    labels = [list(s.gold_labels) for s in seqs]
    return crf.train(
        feats, labels,
        crf.TrainConfig(config.c, config.eta, config.max_iter,
                        config.cutoff),
        profile=config.profile)


def label_document(doc: Document, model: crf.CrfModel,
                   config: RunConfig,
                   priors: Optional[postproc.PriorTable] = None
                   ) -> list[list[str]]:
    """Predicted BIO labels per sequence (CRF plus optional pipeline)."""
    fc, lex, gaz = _feature_context(config)
    out = []
    for seq in doc.sequences:
        feats = features.featurize_sequence(seq, fc, lex, gaz)
        if config.pipeline_enabled and priors is not None:
            marginals = crf.forward_backward(model, feats)
            labels = postproc.run_pipeline(marginals, seq.tokens, priors,
                                           config.pipeline_config())
        else:
            labels = crf.viterbi(model, feats)
        out.append(labels)
    return out


def extract_timexes(doc: Document, labels_per_seq: Seq[Seq[str]],
                    config: RunConfig,
                    rules=None) -> list[Timex]:
    """Spans from predicted labels, normalized against the document DCT.

    Expressions no rule matches are dropped unless config.fallback maps
    them to (DATE, PRESENT_REF).
    """
    if rules is None:
        rules = (normalizer.load_rule_overrides(config.rules_path)
                 + normalizer.default_rules()
                 if config.rules_path else normalizer.default_rules())
        rules = sorted(rules, key=lambda r: (r.priority, r.id))
    anchor = Anchor.from_date(doc.dct)
    timexes = []
    for si, (seq, labels) in enumerate(
            zip(doc.sequences, labels_per_seq, strict=True)):
        for span in bio_to_spans(list(labels), seq, si, tolerant=True):
            surfaces = [seq.tokens[i].surface
                        for i in range(span.first_token,
                                       span.last_token + 1)]
            result = normalizer.normalize(surfaces, anchor, rules,
                                          config.norm_config())
            if result is None:
                if not config.fallback:
                    continue
                result = ("DATE", "PRESENT_REF")
            timexes.append(Timex(span, result[0], result[1]))
    return timexes


def tag_document(doc: Document, model: crf.CrfModel, config: RunConfig,
                 priors: Optional[postproc.PriorTable] = None
                 ) -> tuple[Document, list[Timex]]:
    labels = label_document(doc, model, config, priors)
    timexes = extract_timexes(doc, labels, config)
    return with_labels(doc, labels), timexes


def spans_f1(gold_docs: Seq[Document], labels_per_doc,
             regime: str = "strict") -> float:
    """Span F1 of predicted labels against gold labels, over documents."""
    total = evaluation.MatchCounts()
    for doc, labels_per_seq in zip(gold_docs, labels_per_doc, strict=True):
        gold = [span_char_range(doc, s) for s in doc_spans(doc)]
        pred_spans = []
        for si, (seq, labels) in enumerate(
                zip(doc.sequences, labels_per_seq, strict=True)):
            pred_spans.extend(bio_to_spans(list(labels), seq, si,
                                           tolerant=True))
        pred = [span_char_range(doc, s) for s in pred_spans]
        counts, _ = evaluation.match_spans(gold, pred, regime)
        total = total + counts
    return evaluation.prf(total)["F1"]


def evaluate_corpora(gold_docs: Seq[Document], pred_docs: Seq[Document],
                     gold_attrs=None, pred_attrs=None
                     ) -> evaluation.EvalReport:
    """Full report from two label-carrying corpora aligned by doc id.

    Attribute accuracies are computed over the lenient alignment when
    sidecar attribute tables are supplied for both sides.
    """
    gold_by_id = {d.id: d for d in gold_docs}
    pred_by_id = {d.id: d for d in pred_docs}
    missing = sorted(set(gold_by_id) ^ set(pred_by_id))
    if missing:
        raise evaluation.EvalError(
            "unmatched document ids: " + ", ".join(missing))
    strict = evaluation.MatchCounts()
    lenient = evaluation.MatchCounts()
    type_pairs: list[tuple[str, str]] = []
    value_pairs: list[tuple[str, str]] = []
    warnings: list[str] = []
    with_attrs = gold_attrs is not None and pred_attrs is not None
    for doc_id in sorted(gold_by_id):
        gdoc, pdoc = gold_by_id[doc_id], pred_by_id[doc_id]
        gold = [span_char_range(gdoc, s) for s in doc_spans(gdoc)]
        pred = [span_char_range(pdoc, s) for s in doc_spans(pdoc)]
        s_counts, _ = evaluation.match_spans(gold, pred, "strict")
        l_counts, alignment = evaluation.match_spans(gold, pred, "lenient")
        strict = strict + s_counts
        lenient = lenient + l_counts
        if with_attrs:
            for gi, pi in alignment:
                gkey = (doc_id, *gold[gi])
                pkey = (doc_id, *pred[pi])
                if gkey in gold_attrs and pkey in pred_attrs:
                    type_pairs.append((gold_attrs[gkey][0],
                                       pred_attrs[pkey][0]))
                    value_pairs.append((gold_attrs[gkey][1],
                                        pred_attrs[pkey][1]))
    type_acc = value_acc = None
    if with_attrs:
        if type_pairs:
            type_acc = sum(1 for g, p in type_pairs if g == p) \
                / len(type_pairs)
            value_acc = sum(1 for g, p in value_pairs if g == p) \
                / len(value_pairs)
        else:
            type_acc, value_acc = 0.0, 0.0
            warnings.append("empty lenient alignment for attributes")
    return evaluation.report_from_counts(strict, lenient, type_acc,
                                         value_acc, warnings)
