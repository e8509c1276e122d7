from .tokenize import Token, TokenStream, tokenize, count_words, DEFAULT_FILLERS
from .tagger import PosTag, TaggerModel, load_tagger, pos_tag
from .lexicon import CategoryLexicon, load_lexicon, liwc_counts, CATEGORY_NAMES
from .registry import FeatureDef, feature_registry, DIMENSIONS
from .extract import extract_features, feature_matrix, features_to_csv, Standardization

__all__ = [
    "Token", "TokenStream", "tokenize", "count_words", "DEFAULT_FILLERS",
    "PosTag", "TaggerModel", "load_tagger", "pos_tag",
    "CategoryLexicon", "load_lexicon", "liwc_counts", "CATEGORY_NAMES",
    "FeatureDef", "feature_registry", "DIMENSIONS",
    "extract_features", "feature_matrix", "features_to_csv", "Standardization",
]
