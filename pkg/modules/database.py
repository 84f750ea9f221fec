import sqlite3
import hashlib
import logging
import threading
from datetime import datetime
from typing import Dict, List, Optional

import numpy as np

from .enumeration import StateSpace
from .graph_core import DegreeSequence, Graph

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def space_key(d: DegreeSequence) -> str:
    return hashlib.blake2b(",".join(map(str, d.degrees)).encode(), digest_size=16).hexdigest()


class SpaceCache:
    def __init__(self, db_path: str = 'trichain_cache.db'):
        """Initialize the state-space cache"""
        self.db_path = db_path
        self.lock = threading.Lock()
        self.init_database()

    def init_database(self):
        """Create tables, rebuilding them when the schema version changed"""
        with self.lock:
            try:
                conn = sqlite3.connect(self.db_path)
                cursor = conn.cursor()

                version = cursor.execute('PRAGMA user_version').fetchone()[0]
                if version not in (0, SCHEMA_VERSION):
                    logger.warning(f"Cache schema version {version} != {SCHEMA_VERSION}, rebuilding")
                    cursor.execute('DROP TABLE IF EXISTS census')
                    cursor.execute('DROP TABLE IF EXISTS states')
                    cursor.execute('DROP TABLE IF EXISTS spaces')

                cursor.execute('''
                    CREATE TABLE IF NOT EXISTS spaces (
                        key TEXT PRIMARY KEY,
                        n INTEGER NOT NULL,
                        degrees TEXT NOT NULL,
                        size INTEGER NOT NULL,
                        created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
                    )
                ''')
                cursor.execute('''
                    CREATE TABLE IF NOT EXISTS states (
                        space_key TEXT NOT NULL,
                        idx INTEGER NOT NULL,
                        edges BLOB NOT NULL,
                        PRIMARY KEY (space_key, idx)
                    )
                ''')
                cursor.execute('''
                    CREATE TABLE IF NOT EXISTS census (
                        space_key TEXT NOT NULL,
                        t INTEGER NOT NULL,
                        count INTEGER NOT NULL,
                        PRIMARY KEY (space_key, t)
                    )
                ''')
                cursor.execute(f'PRAGMA user_version = {SCHEMA_VERSION}')

                conn.commit()
                conn.close()
                logger.debug(f"State-space cache ready at {self.db_path}")

            except Exception as e:
                logger.error(f"Error initializing cache: {str(e)}")
                raise

    def save_space(self, space: StateSpace) -> str:
        """Store the states and census of an enumerated space"""
        key = space_key(space.d)
        with self.lock:
            try:
                conn = sqlite3.connect(self.db_path)
                cursor = conn.cursor()
                cursor.execute('DELETE FROM states WHERE space_key = ?', (key,))
                cursor.execute('DELETE FROM census WHERE space_key = ?', (key,))
                cursor.execute('''
                    INSERT OR REPLACE INTO spaces (key, n, degrees, size, created_at)
                    VALUES (?, ?, ?, ?, ?)
                ''', (key, space.d.n, ",".join(map(str, space.d.degrees)), space.size,
                      datetime.now().isoformat()))
                cursor.executemany(
                    'INSERT INTO states (space_key, idx, edges) VALUES (?, ?, ?)',
                    ((key, i, np.asarray(state, dtype=np.int32).tobytes())
                     for i, state in enumerate(space.states)),
                )
                cursor.executemany(
                    'INSERT INTO census (space_key, t, count) VALUES (?, ?, ?)',
                    ((key, t, c) for t, c in space.census.items()),
                )
                conn.commit()
                conn.close()
                logger.info(f"Cached {space.size} states of {space.d.label()}")
                return key

            except Exception as e:
                logger.error(f"Error caching space {space.d.label()}: {str(e)}")
                raise

    def load_space(self, d: DegreeSequence) -> Optional[StateSpace]:
        """Load a cached space, or None when absent or inconsistent"""
        key = space_key(d)
        with self.lock:
            try:
                conn = sqlite3.connect(self.db_path)
                cursor = conn.cursor()
                row = cursor.execute('SELECT size FROM spaces WHERE key = ?', (key,)).fetchone()
                if row is None:
                    conn.close()
                    return None
                blobs = cursor.execute(
                    'SELECT edges FROM states WHERE space_key = ? ORDER BY idx', (key,)
                ).fetchall()
                stored_census = dict(cursor.execute(
                    'SELECT t, count FROM census WHERE space_key = ?', (key,)
                ).fetchall())
                conn.close()
            except Exception as e:
                logger.error(f"Error loading cached space {d.label()}: {str(e)}")
                return None

        states = []
        for (blob,) in blobs:
            flat = np.frombuffer(blob, dtype=np.int32).reshape(-1, 2)
            states.append(tuple((int(u), int(v)) for u, v in flat))
        t_values = np.array([Graph.from_edges(d.n, s).t for s in states], dtype=np.int64)
        census: Dict[int, int] = {}
        for t in t_values:
            census[int(t)] = census.get(int(t), 0) + 1
        if len(states) != row[0] or census != stored_census:
            logger.warning(f"Cached space {d.label()} is inconsistent, ignoring it")
            return None
        logger.info(f"Loaded {len(states)} cached states of {d.label()}")
        return StateSpace(d=d, states=states, t_values=t_values, census=dict(sorted(census.items())))

    def list_spaces(self) -> List[Dict]:
        with self.lock:
            try:
                conn = sqlite3.connect(self.db_path)
                conn.row_factory = sqlite3.Row
                rows = conn.execute('SELECT * FROM spaces ORDER BY created_at').fetchall()
                conn.close()
                return [dict(row) for row in rows]
            except Exception as e:
                logger.error(f"Error listing cached spaces: {str(e)}")
                return []

    def clear(self) -> int:
        """Remove every cached space"""
        with self.lock:
            try:
                conn = sqlite3.connect(self.db_path)
                cursor = conn.cursor()
                cursor.execute('DELETE FROM states')
                cursor.execute('DELETE FROM census')
                cursor.execute('DELETE FROM spaces')
                count = cursor.rowcount
                conn.commit()
                conn.close()
                logger.info(f"Cleared {count} cached spaces")
                return count
            except Exception as e:
                logger.error(f"Error clearing cache: {str(e)}")
                return 0
