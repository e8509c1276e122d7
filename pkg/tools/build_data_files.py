"""Builds the frozen data files bundled with the package.

Run from the repo root: python tools/build_data_files.py
The outputs are committed; this script exists so the files can be audited
and regenerated.
"""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "speechscreen" / "data"

# ---------------------------------------------------------------- tagger ---

DET = """the a an this that these those some any no every each either neither
both all half such what which another""".split()

PRON = """i me my mine myself you your yours yourself he him his himself she
her hers herself it its itself we us our ours ourselves they them their theirs
themselves who whom whose someone somebody something anyone anybody anything
everyone everybody everything nobody nothing""".split()

VERB = """be am is are was were been being have has had having do does did
doing done can could will would shall should may might must go goes going went
gone get gets getting got gotten see sees seeing saw seen look looks looking
looked take takes taking took taken make makes making made know knows knowing
knew known think thinks thinking thought say says saying said tell tells
telling told want wants wanting wanted try tries trying tried reach reaches
reaching reached fall falls falling fell fallen stand stands standing stood
wash washes washing washed dry dries drying dried run runs running ran
overflow overflows overflowing overflowed spill spills spilling spilled climb
climbs climbing climbed give gives giving gave given put puts putting steal
steals stealing stole stolen tip tips tipping tipped wobble wobbles wobbling
wobbled slip slips slipping slipped ask asks asked asking come comes coming
came let lets letting seem seems seemed seeming happen happens happening
happened sit sits sitting sat eat eats eating ate eaten grab grabs grabbing
grabbed hold holds holding held play plays playing played laugh laughs
laughing laughed watch watches watching watched notice notices noticing
noticed pay pays paying paid turn turns turning turned start starts starting
started keep keeps keeping kept wipe wipes wiping wiped use uses using used
leave leaves leaving need needs needed needing appear appears appeared remember
remembers remembered forget forgets forgot guess guesses guessed suppose
supposes supposed mean means meant believe believes believed hear hears heard
listen listens listened feel feels felt touch touches touched drip drips
dripping dripped pour pours pouring poured hang hangs hanging hung 're 'm 've
'll 'd""".split()

NOUN = """boy girl kid kids child children mother mom mommy woman lady man
father dad daddy sister brother cookie cookies jar lid stool chair counter
countertop cupboard cabinet shelf shelves sink water dish dishes plate plates
cup cups towel apron faucet tap floor window curtain curtains kitchen garden
yard tree grass house door wall hands foot feet arm arms leg legs head face
eye eyes ear ears mouth body picture scene summer day time thing things stuff
part place side top bottom front middle edge moment trouble problem mess noise
attention fact way lot bit kind sort type food home school work job money week
year action breeze wind""".split()

ADJ = """little big small large young old high low long short open closed full
empty wet busy dirty nice good bad happy sad right same different other ready
sure tall unsteady aware unaware first second third next clean""".split()

ADV = """not very just so too also then there here now again still only even
really quite almost already always never often sometimes usually maybe perhaps
probably away when where why how anyway apparently obviously clearly simply
finally once twice rather instead else ever yet soon later ago far
meanwhile""".split()

ADP = """in on at by for with from of off up down out into onto over under
above below behind beside between through during after before against about
around near without within toward towards across along past outside inside
beneath underneath upon as""".split()

CONJ = """and but or nor because although though while if unless until since
whereas than whether""".split()

NUM = """one two three four five six seven eight nine ten eleven twelve twenty
thirty forty fifty hundred thousand""".split()

PART = ["to", "n't", "'s"]

INTJ = """um uh er ah hm hmm mhm oh huh wow yeah yes okay ok ooh whoops oops
gee gosh hey hello hi bye please thanks alright uhhuh well""".split()

X = ["xxx", "yyy"]

LEXICON = {}
for words, tag in [(DET, "DET"), (PRON, "PRON"), (VERB, "VERB"), (NOUN, "NOUN"),
                   (ADJ, "ADJ"), (ADV, "ADV"), (ADP, "ADP"), (CONJ, "CONJ"),
                   (NUM, "NUM"), (PART, "PART"), (INTJ, "INTJ"), (X, "X")]:
    for w in words:
        LEXICON[w] = tag  # later lists win on conflicts; order above is final

SUFFIX_RULES = [
    ["tion", "NOUN"], ["sion", "NOUN"], ["ment", "NOUN"], ["ness", "NOUN"],
    ["ship", "NOUN"], ["hood", "NOUN"], ["ance", "NOUN"], ["ence", "NOUN"],
    ["ity", "NOUN"], ["ism", "NOUN"], ["ist", "NOUN"],
    ["ing", "VERB"], ["ed", "VERB"],
    ["wards", "ADV"], ["ward", "ADV"], ["ly", "ADV"],
    ["ous", "ADJ"], ["ful", "ADJ"], ["less", "ADJ"], ["able", "ADJ"],
    ["ible", "ADJ"], ["ish", "ADJ"], ["ive", "ADJ"], ["ical", "ADJ"],
    ["iest", "ADJ"], ["ier", "ADJ"], ["est", "ADJ"], ["ic", "ADJ"],
    ["er", "NOUN"], ["or", "NOUN"],
    ["s", "NOUN"],
]

tagger_model = {
    "format": "lexicon-suffix-tagger/1",
    "version": "2024.1",
    "lexicon": dict(sorted(LEXICON.items())),
    "suffix_rules": SUFFIX_RULES,
    "default": "NOUN",
}

# ----------------------------------------------------- category lexicon ---

CATEGORY_LEXICON = {
    "affective": ["happy", "sad", "glad", "worr*", "afraid", "fear*", "lov*",
                  "hate*", "nice", "good", "bad", "terrible", "wonderful",
                  "awful", "laugh*", "cry*", "cried", "smil*", "enjoy*",
                  "upset", "angry", "mad", "scar*", "pleasant", "annoy*",
                  "fun", "funny"],
    "social": ["mother", "father", "mom", "dad", "boy", "girl", "child*",
               "famil*", "friend*", "sister", "brother", "people", "person",
               "lady", "woman", "man", "they", "them", "we", "us", "talk*",
               "tell*", "told", "shar*", "help*", "together", "everyone"],
    "cognition": ["think*", "thought", "know*", "knew", "remember*",
                  "forget*", "forgot", "believ*", "understand*", "realiz*",
                  "wonder*", "guess*", "suppos*", "mean*", "idea*", "maybe",
                  "perhaps", "because", "reason*", "decid*", "notic*",
                  "figur*", "sense"],
    "perception": ["see*", "saw", "seen", "look*", "watch*", "hear*", "heard",
                   "listen*", "feel*", "felt", "touch*", "taste*", "smell*",
                   "sound*", "view*", "observ*", "appear*", "seem*", "show*"],
    "biological": ["hand*", "foot", "feet", "arm", "arms", "leg*", "head",
                   "face", "eye*", "ear*", "mouth", "body", "eat*", "ate",
                   "drink*", "food", "hungry", "sleep*", "wash*", "sick",
                   "hurt*", "blood", "cookie*"],
    "drives": ["want*", "need*", "try*", "tried", "tries", "get*", "got",
               "take*", "took", "reach*", "grab*", "win*", "won", "lose*",
               "lost", "goal*", "must", "should", "work*", "effort*",
               "achiev*"],
    "temporal": ["now", "then", "when", "while", "before", "after", "during",
                 "today", "yesterday", "tomorrow", "always", "never", "soon",
                 "later", "again", "first", "last", "moment*", "time*",
                 "day*", "week*", "year*", "summer", "minute*"],
    "relativity": ["in", "on", "under", "over", "up", "down", "behind",
                   "beside", "near", "far", "here", "there", "outside",
                   "inside", "above", "below", "left", "right", "top",
                   "bottom", "front", "back", "middle", "between", "around",
                   "through", "out", "off"],
    "informal": ["um", "uh", "er", "ah", "hm", "hmm", "mhm", "yeah", "okay",
                 "ok", "huh", "oh", "wow", "gee", "gosh", "stuff", "thing*",
                 "kinda", "sorta", "gonna", "wanna", "like", "well", "anyway",
                 "whatever"],
    "function": ["the", "a", "an", "and", "or", "but", "of", "to", "is",
                 "are", "was", "were", "be", "been", "being", "it", "this",
                 "that", "these", "those", "with", "for", "at", "by", "from",
                 "as", "if", "not", "do", "does", "did", "have", "has", "had",
                 "will", "would", "can", "could", "what", "which", "who",
                 "i", "you", "he", "she", "we", "they"],
    "personal_concerns": ["home", "house", "work*", "job*", "money", "school",
                          "kitchen", "clean*", "cook*", "dish*", "chore*",
                          "garden*", "safe*", "danger*", "risk*", "troubl*",
                          "problem*", "mess", "broke*", "fix*"],
}

# --------------------------------------------------- word frequency list ---
# Ranked list used by the frequency-band features. Ranks 1-100 are the
# classic high-frequency function words; the remainder are common general
# vocabulary in approximate frequency order. Rank = 1-based position.

TOP100 = """the be to of and a in that have i it for not on with he as you do
at this but his by from they we say her she or an will my one all would there
their what so up out if about who get which go me when make can like time no
just him know take people into year your good some could them see other than
then now only come its over think also back after use two how our work first
well way even new want because any these give day most us""".split()

REST = """is was are were been being has had did does done said went gone saw
seen knew thought told made took came got looked less
many much more very still should may might must shall where why before after
again once never always often sometimes usually really quite too same right
left little big small great long short high low old young each both few those
such own under while down off above between through during against around
water boy girl man woman child children mother father house home room door
window kitchen floor wall table chair hand hands head face eyes eye foot feet
arm arms leg legs side top part place thing things something anything nothing
everything someone anyone everyone nobody world life night morning evening
week month hour minute moment name number word words line story fact group
problem question school family mom dad sister brother friend friends person
car city country state street road tree trees grass garden yard summer winter
spring fall air fire light sound voice noise music food bread milk dinner
breakfast lunch cup plate dish dishes glass bottle jar lid box bag book paper
pen letter picture money dog cat bird fish horse cookie cookies cake sugar
butter apple fruit egg meat rice tea coffee chicken sandwich towel apron
curtain curtains sink faucet tap stool bench shelf cupboard cabinet counter
stove oven pot pan knife fork spoon bowl basket clothes dress shirt shoes hat
coat pocket button clock watch phone radio television machine engine wheel
boat ship train plane bus bicycle station airport bridge river lake sea ocean
mountain hill field farm animal cow sheep pig rabbit mouse snake spider insect
flower rose leaf leaves branch root seed plant wood stone rock sand earth
ground sky cloud clouds rain snow wind storm sun moon star stars weather
spring2 heat cold ice warm cool dry wet clean dirty new2 fresh soft hard
smooth rough heavy light2 fast slow quick early late near far deep shallow
wide narrow thick thin strong weak safe dangerous easy difficult simple
possible impossible important necessary special general common rare whole
half quarter single double next last final certain sure ready busy free
careful careless happy sad angry afraid glad sorry proud tired hungry thirsty
sick healthy alive dead open closed full empty loud quiet dark bright pretty
beautiful ugly fine nice2 kind2 mean2 funny serious crazy silly smart stupid
wise poor rich lucky
going doing saying getting making taking coming looking trying asking telling
working playing walking running standing sitting falling washing drying
eating drinking sleeping reading writing talking thinking feeling hearing
seeing watching waiting helping giving showing starting stopping turning
opening closing reaching climbing holding keeping letting putting leaving
bringing carrying pulling pushing lifting dropping spilling breaking fixing
cleaning cooking baking stealing grabbing slipping tipping wobbling laughing
crying smiling shouting calling answering asking2 wondering remembering
forgetting noticing
walk walks walked talk talks talked call calls called ask2 answer answers
answered stop stops stopped start2 starts2 started2 help helps helped wait
waits waited live lives lived move moves moved turn2 turned2 bring brings
brought carry carries carried pull pulls pulled push pushes pushed lift lifts
lifted drop drops dropped break breaks broke broken fix fixes fixed cook
cooks cooked bake bakes baked read reads write writes wrote written sing
sings sang sleep sleeps slept wake wakes woke speak speaks spoke spoken
listen2 hears2 feels2 smells tastes touches stands2 sits2 lies lay lain
happens2 becomes became begin begins began begun end ends ended finish
finishes finished continue continues continued change changes changed grow
grows grew grown learn learns learned teach teaches taught buy buys bought
sell sells sold pay2 pays2 paid2 spend spends spent save saves saved lose2
loses lost2 win2 wins won2 find finds found choose chooses chose chosen
decide decides decided plan plans planned hope hopes hoped wish wishes wished
dream dreams dreamed worry worries worried care cares cared love loves loved
hate hates hated enjoy enjoys enjoyed prefer prefers preferred
almost enough quite2 rather pretty2 fairly nearly hardly barely mostly mainly
exactly certainly probably possibly maybe2 perhaps2 definitely absolutely
completely totally entirely finally suddenly quickly slowly carefully quietly
loudly easily happily sadly luckily unfortunately actually basically
especially particularly generally normally typically obviously apparently
clearly simply directly immediately recently currently eventually originally
previously anymore anywhere everywhere somewhere nowhere forever meanwhile
however therefore although though unless until since whereas whether
besides except despite including regarding concerning throughout beyond
behind2 beneath underneath alongside onto2 upon2 within2 without2 toward2
outside2 inside2 across2 along2 past2""".split()

# de-duplicate while preserving order and dropping the disambiguation marks
seen = set(TOP100)
ranked = list(TOP100)
for w in REST:
    w = w.rstrip("0123456789")
    if w and w not in seen:
        seen.add(w)
        ranked.append(w)

word_frequency = {"format": "ranked-wordlist/1", "words": ranked}

OUT.mkdir(parents=True, exist_ok=True)
(OUT / "tagger_model.json").write_text(
    json.dumps(tagger_model, indent=1, sort_keys=True) + "\n", encoding="utf-8")
(OUT / "category_lexicon.json").write_text(
    json.dumps(CATEGORY_LEXICON, indent=1) + "\n", encoding="utf-8")
(OUT / "word_frequency.json").write_text(
    json.dumps(word_frequency, indent=1) + "\n", encoding="utf-8")
print("wrote", len(LEXICON), "lexicon entries,",
      len(ranked), "ranked words")
