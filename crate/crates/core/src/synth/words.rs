pub const WORDS: &[&str] = &[
    "about", "above", "across", "after", "again", "air", "all", "almost", "along", "also",
    "always", "and", "animal", "another", "answer", "any", "around", "ask", "away", "back",
    "because", "been", "before", "began", "begin", "below", "between", "big", "book", "both",
    "boy", "bring", "build", "call", "came", "can", "car", "carry", "change", "children",
    "city", "close", "come", "could", "country", "cut", "day", "did", "different", "does",
    "don't", "door", "down", "draw", "each", "earth", "eat", "end", "enough", "even",
    "every", "example", "eye", "face", "family", "far", "father", "feet", "few", "find",
    "first", "follow", "food", "form", "found", "four", "from", "get", "girl", "give",
    "good", "got", "great", "green", "grow", "hand", "hard", "have", "head", "hear",
    "help", "here", "high", "home", "house", "idea", "important", "just", "keep", "kind",
    "know", "land", "large", "last", "learn", "leave", "letter", "life", "light", "line",
    "list", "little", "live", "long", "look", "made", "make", "man", "many", "may",
    "mean", "men", "might", "mile", "miss", "more", "most", "mother", "mountain", "move",
    "much", "must", "name", "near", "need", "never", "new", "next", "night", "number",
    "often", "old", "once", "only", "open", "other", "our", "over", "own", "page",
    "paper", "part", "people", "picture", "place", "plant", "play", "point", "put", "question",
    "quick", "read", "really", "right", "river", "run", "said", "same", "saw", "say",
    "school", "sea", "second", "see", "seem", "sentence", "set", "should", "show", "side",
    "small", "something", "sometimes", "song", "soon", "sound", "spell", "start", "state", "still",
    "stop", "story", "study", "such", "take", "talk", "tell", "than", "that", "their",
    "them", "then", "there", "these", "thing", "think", "those", "thought", "three", "through",
    "time", "together", "took", "tree", "try", "turn", "under", "until", "use", "very",
    "walk", "want", "watch", "water", "way", "well", "went", "were", "what", "when",
    "where", "while", "white", "who", "why", "will", "with", "without", "word", "work",
    "world", "would", "write", "year", "young",
];
