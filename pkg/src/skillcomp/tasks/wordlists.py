"""Bundled name tables for the natural-language dataset generators.

All entries are single common words so downstream tokenizers treat each
name as one unit. Entity names cover graphs up to 120 individuals.
"""

ENTITY_NAMES = [
    "Alice", "Bob", "Carol", "David", "Emma", "Frank", "Grace", "Henry",
    "Ivy", "Jack", "Karen", "Liam", "Mona", "Nathan", "Olivia", "Peter",
    "Quinn", "Rachel", "Sam", "Tina", "Ursula", "Victor", "Wendy", "Xavier",
    "Yara", "Zach", "Amber", "Brian", "Clara", "Derek", "Elena", "Felix",
    "Gina", "Hugo", "Irene", "Jonas", "Kyle", "Laura", "Marco", "Nina",
    "Oscar", "Paula", "Ralph", "Sofia", "Tom", "Uma", "Vera", "Walter",
    "Ximena", "Yusuf", "Zoe", "Aaron", "Bella", "Caleb", "Diana", "Ethan",
    "Fiona", "George", "Hannah", "Isaac", "Julia", "Kevin", "Lily", "Mason",
    "Nora", "Owen", "Penny", "Quentin", "Rosa", "Steve", "Tara", "Ulrich",
    "Violet", "Wade", "Xena", "Yvonne", "Zane", "Abby", "Boris", "Cindy",
    "Dylan", "Erica", "Fred", "Gloria", "Harold", "Ingrid", "Jake", "Kate",
    "Leo", "Mia", "Noah", "Opal", "Pablo", "Rita", "Sean", "Tess",
    "Umar", "Vince", "Willa", "Xander", "Yolanda", "Zelda", "Andre", "Bianca",
    "Cole", "Daisy", "Eli", "Faye", "Gavin", "Holly", "Ian", "Jade",
    "Kurt", "Lena", "Milo", "Nadia", "Otto", "Priya", "Reed", "Stella",
]

RELATION_NAMES = [
    "teacher", "instructor", "mentor", "coach", "tutor", "advisor",
    "neighbor", "friend", "doctor", "dentist", "lawyer", "barber",
    "landlord", "plumber", "gardener", "trainer", "manager", "assistant",
    "driver", "chef", "tailor", "broker", "editor", "guide",
]

ITEM_NAMES = [
    "Pelican", "Gull", "Boxfish", "Boomslang", "Viper", "Mammoth",
    "Whale", "Penguin", "Frog", "Otter", "Falcon", "Heron",
    "Badger", "Lynx", "Marmot", "Stork", "Tortoise", "Walrus",
    "Ibex", "Jackal", "Kestrel", "Lemur", "Magpie", "Narwhal",
    "Ocelot", "Puffin", "Quail", "Raven", "Seal", "Toucan",
    "Urchin", "Vole", "Wombat", "Yak", "Zebra", "Bison",
    "Condor", "Dingo", "Egret", "Ferret", "Gecko", "Hornet",
]

PLACE_NAMES = [
    "Riverside Farm", "Maple Grove", "Cedar Valley", "Willow Creek",
    "Stone Harbor", "Pine Ridge", "Clearwater Bay", "Fox Hollow",
    "Amber Fields", "Silver Lake", "Juniper Hills", "Osprey Point",
]
